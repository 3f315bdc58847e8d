"""Physical device description: bounded parameters and Hamiltonian terms.

A DeviceModel holds qudits and drive lines and assembles the drift
Hamiltonian H0 = 2π·freq·n - 2π·(anhar/2)·(n-1)n (rad/s, diagonal in the
Fock basis) and the dimensionless drive coupling b + b†. Frequencies are
stored in "Hz 2pi" units: plain Hz numbers that pick up their 2π factor
only when entering a Hamiltonian.
"""

import copy

import numpy as np

from . import qcore

TWO_PI = 2 * np.pi

#: Closed set of accepted unit strings. "Hz 2pi" values are multiplied by
#: 2π at the Hamiltonian boundary; everything else is used as stored.
UNITS = ("Hz 2pi", "Hz/V", "S/s", "V", "rad", "s", "")

# Pretty-printing scale prefixes, largest first.
_PREFIXES = [(1e9, "G"), (1e6, "M"), (1e3, "k"), (1.0, ""), (1e-3, "m"), (1e-6, "u"), (1e-9, "n")]


class Quantity:
    """A bounded physical parameter, the atom of everything optimizable.

    The scaled representation s = 2(value - min)/(max - min) - 1 maps the
    allowed range onto [-1, 1]; optimizers work in that box. Out-of-range
    writes clamp to the nearest bound and report the clamp to the caller
    rather than raising, since population optimizers propose freely.
    """

    __slots__ = ("_value", "min_val", "max_val", "unit")

    def __init__(self, value, min_val=None, max_val=None, unit=""):
        if unit not in UNITS:
            raise ValueError(f"unknown unit {unit!r}; expected one of {UNITS}")
        if min_val is None or max_val is None:
            half = 0.5 * abs(value) if value else 1.0
            min_val = value - half if min_val is None else min_val
            max_val = value + half if max_val is None else max_val
        if not min_val < max_val:
            raise ValueError(f"Quantity bounds must satisfy min < max, got [{min_val}, {max_val}]")
        if not np.isfinite(value):
            raise ValueError("Quantity value must be finite")
        self.min_val = float(min_val)
        self.max_val = float(max_val)
        self.unit = unit
        self._value = float(np.clip(value, min_val, max_val))

    def get_value(self) -> float:
        return self._value

    def set_value(self, value: float) -> bool:
        """Write a physical value; returns True if it had to be clamped."""
        if not np.isfinite(value):
            raise ValueError("Quantity value must be finite")
        clamped = value < self.min_val or value > self.max_val
        self._value = float(np.clip(value, self.min_val, self.max_val))
        return clamped

    def get_scaled(self) -> float:
        return 2.0 * (self._value - self.min_val) / (self.max_val - self.min_val) - 1.0

    def set_scaled(self, s: float) -> bool:
        """Write a scaled [-1, 1] value; returns True if s was clamped."""
        clamped = s < -1.0 or s > 1.0
        s = float(np.clip(s, -1.0, 1.0))
        self._value = self.min_val + (s + 1.0) * (self.max_val - self.min_val) / 2.0
        return clamped

    def to_dict(self) -> dict:
        return {
            "value": self._value,
            "min": self.min_val,
            "max": self.max_val,
            "unit": self.unit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Quantity":
        return cls(d["value"], d.get("min"), d.get("max"), d.get("unit", ""))

    def __float__(self) -> float:
        return self._value

    def __repr__(self) -> str:
        for scale, prefix in _PREFIXES:
            if abs(self._value) >= scale:
                return f"{self._value / scale:.6g} {prefix}{self.unit}".rstrip()
        return f"{self._value:.6g} {self.unit}".rstrip()


def quantity_set_scaled(q: Quantity, s: float):
    """Functional form of Quantity.set_scaled: returns (quantity, clamped)."""
    clamped = q.set_scaled(s)
    return q, clamped


class Qubit:
    """A weakly anharmonic qudit.

    freq and anhar are "Hz 2pi" Quantities; anhar is negative for the
    transmon-like spectrum modeled here. hilbert_dim >= 3 is needed for
    the anharmonic term to act at all ((n-1)n vanishes for n <= 1).
    """

    def __init__(self, name: str, freq: Quantity, anhar: Quantity, hilbert_dim: int = 3):
        if hilbert_dim < 2:
            raise ValueError("hilbert_dim must be >= 2")
        self.name = name
        self.freq = freq
        self.anhar = anhar
        self.hilbert_dim = int(hilbert_dim)

    def params(self) -> dict:
        return {"freq": self.freq, "anhar": self.anhar}


class Drive:
    """A drive line coupling c(t)·(b + b†) into the connected qubits."""

    def __init__(self, name: str, connected):
        self.name = name
        self.connected = list(connected)


class DeviceModel:
    """Qudits plus drive lines; produces drift and control matrices.

    Multi-qubit models compose operators by Kronecker products with
    identity padding; the shipped example uses a single qudit.
    """

    def __init__(self, qubits, drives):
        self.qubits = list(qubits)
        self.drives = list(drives)
        names = [q.name for q in self.qubits]
        if len(set(names)) != len(names):
            raise ValueError("duplicate qubit names")
        for d in self.drives:
            for target in d.connected:
                if target not in names:
                    raise ValueError(f"drive {d.name!r} connects to unknown qubit {target!r}")
        self._qubit_index = {q.name: i for i, q in enumerate(self.qubits)}
        self._drive_index = {d.name: d for d in self.drives}
        self.total_dim = int(np.prod([q.hilbert_dim for q in self.qubits]))
        # Per-qubit diagonal factors of Eq-style drift terms and per-drive
        # couplings, cached once; the Quantities stay live so parameter
        # updates need no rebuild.
        self._n_ops = [self._embed(qcore.number_op(q.hilbert_dim), i) for i, q in enumerate(self.qubits)]
        self._anhar_ops = []
        for i, q in enumerate(self.qubits):
            n = qcore.number_op(q.hilbert_dim)
            self._anhar_ops.append(self._embed((n - np.eye(q.hilbert_dim)) @ n, i))
        self._coupling_ops = {}
        for d in self.drives:
            op = np.zeros((self.total_dim, self.total_dim), dtype=np.complex128)
            for target in d.connected:
                i = self._qubit_index[target]
                b = qcore.ladder(self.qubits[i].hilbert_dim)
                op = op + self._embed(b + b.conj().T, i)
            self._coupling_ops[d.name] = op

    def _embed(self, op: np.ndarray, index: int) -> np.ndarray:
        full = np.array([[1.0 + 0j]])
        for i, q in enumerate(self.qubits):
            factor = op if i == index else np.eye(q.hilbert_dim)
            full = np.kron(full, factor)
        return full

    def qubit(self, name: str) -> Qubit:
        return self.qubits[self._qubit_index[name]]

    def parameter(self, qubit_name: str, param: str) -> Quantity:
        try:
            return self.qubit(qubit_name).params()[param]
        except KeyError:
            raise KeyError(f"model has no parameter ({qubit_name!r}, {param!r})") from None

    def drift_hamiltonian(self) -> np.ndarray:
        """H0 in rad/s: 2π·freq·n - 2π·(anhar/2)·(n-1)n per qudit."""
        h = np.zeros((self.total_dim, self.total_dim), dtype=np.complex128)
        for i, q in enumerate(self.qubits):
            h += TWO_PI * q.freq.get_value() * self._n_ops[i]
            h -= TWO_PI * q.anhar.get_value() / 2.0 * self._anhar_ops[i]
        return h

    def control_hamiltonian(self, drive: str) -> np.ndarray:
        """Dimensionless drive coupling b + b†; scaled by c(t) at propagation."""
        if drive not in self._coupling_ops:
            raise KeyError(f"unknown drive {drive!r}")
        return self._coupling_ops[drive]

    def subspace_indices(self, qubit_name: str, levels=(0, 1)):
        """Full-space indices of the given levels of one qudit, all others in |0⟩."""
        idx = []
        for level in levels:
            pos = 0
            for q in self.qubits:
                pos *= q.hilbert_dim
                if q.name == qubit_name:
                    pos += level
            idx.append(pos)
        return idx

    def copy(self) -> "DeviceModel":
        return copy.deepcopy(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceModel":
        qubits = [
            Qubit(
                qd["name"],
                Quantity.from_dict(qd["freq"]),
                Quantity.from_dict(qd["anhar"]),
                qd.get("hilbert_dim", 3),
            )
            for qd in d["qubits"]
        ]
        drives = [Drive(dd["name"], dd["connected"]) for dd in d["drives"]]
        return cls(qubits, drives)
