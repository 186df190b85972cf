"""Minimal gate-list circuit representation shared by codes and sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import embed


@dataclass(frozen=True)
class Gate:
    """A named unitary acting on an ordered subset of register qubits."""

    name: str
    matrix: np.ndarray
    targets: tuple

    def embedded(self, n_qubits: int) -> np.ndarray:
        return embed(self.matrix, self.targets, n_qubits)


def circuit_unitary(gates, n_qubits: int) -> np.ndarray:
    """Product of the gate list, first gate applied first."""
    u = np.eye(1 << n_qubits, dtype=complex)
    for g in gates:
        u = g.embedded(n_qubits) @ u
    return u


def inverse_gates(gates) -> list:
    """Gate list realizing the exact inverse circuit."""
    return [Gate(g.name + "^-1", g.matrix.conj().T, g.targets) for g in reversed(gates)]
