"""dfslab: simulation of dynamically generated decoherence-free subspaces.

Dense state-vector simulation of small qubit registers coupled to explicit
qubit baths, with two- and three-qubit decoherence-free encodings,
symmetrizing dynamical-decoupling sequences, post-selection error detection,
and a fidelity-analysis stack (bootstrap, decay fits, spline integration).
"""

__version__ = "0.1.0"
