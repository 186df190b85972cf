"""Bundled device calibration tables (relaxation times, gate/readout errors)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

_DATA = None


def _load():
    global _DATA
    if _DATA is None:
        text = resources.files("dfslab").joinpath("data/device_defaults.json").read_text()
        _DATA = json.loads(text)
    return _DATA


@dataclass(frozen=True)
class QubitRecord:
    t1_us: float
    t2_us: float
    err_1q: float
    err_ro: float


@dataclass(frozen=True)
class CnotRecord:
    err_cx: float
    dur_cx_ns: float


@dataclass(frozen=True)
class DeviceDefaults:
    """Per-qubit and per-pair calibration averages for one named device."""

    name: str
    provenance: str
    qubits: dict  # int -> QubitRecord
    cnot: dict    # (control, target) -> CnotRecord

    @classmethod
    def load(cls, name: str) -> "DeviceDefaults":
        devices = _load()["devices"]
        if name not in devices:
            raise KeyError(f"unknown device {name!r}; available: {sorted(devices)}")
        raw = devices[name]
        qubits = {int(k): QubitRecord(**v) for k, v in raw["qubits"].items()}
        cnot = {tuple(int(x) for x in k.split(",")): CnotRecord(**v)
                for k, v in raw["cnot"].items()}
        return cls(name=name, provenance=raw["provenance"], qubits=qubits, cnot=cnot)

    def cnot_record(self, control: int, target: int) -> CnotRecord:
        """Calibration for a directed pair; either orientation is accepted
        (the tables list the faster direction only)."""
        if (control, target) in self.cnot:
            return self.cnot[(control, target)]
        if (target, control) in self.cnot:
            return self.cnot[(target, control)]
        raise KeyError(f"no CNOT calibration for pair ({control}, {target}) on {self.name}")

    def mean_err_1q(self) -> float:
        return sum(q.err_1q for q in self.qubits.values()) / len(self.qubits)

    def mean_err_ro(self) -> float:
        return sum(q.err_ro for q in self.qubits.values()) / len(self.qubits)

    def mean_err_cx(self) -> float:
        return sum(c.err_cx for c in self.cnot.values()) / len(self.cnot)

    def mean_dur_cx_ns(self) -> float:
        return sum(c.dur_cx_ns for c in self.cnot.values()) / len(self.cnot)


def available_devices() -> list:
    return sorted(_load()["devices"])
