"""Density-matrix replay of compiled circuits under thermal relaxation and readout error.

Each ideal gate is followed, on every qubit it touches, by a thermal
relaxation channel lasting the gate's duration: amplitude damping with
``p = 1 - exp(-t/T1)`` composed with pure dephasing at rate
``1/T_phi = 1/T2 - 1/(2 T1)``. Idle qubits do not decay and there is no
crosstalk. Readout applies a per-qubit confusion matrix to the diagonal of
the final density matrix.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuit import Circuit, Gate, apply_unitary
from .hamiltonian import Hamiltonian
from .statevec import StateVector, uniform_init

MAX_DM_QUBITS = 6
STOCHASTIC_TOL = 1e-12


class NoiseModelError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """Relaxation times in microseconds, gate durations in nanoseconds.

    ``p_ab`` is the probability of reading ``b`` when the qubit is in ``a``.
    """

    t1_us: float = 100.0
    t2_us: float = 80.0
    tg1_ns: float = 0.02
    tg2_ns: float = 0.1
    p00: float = 0.995
    p01: float = 0.005
    p10: float = 0.02
    p11: float = 0.98

    def __post_init__(self):
        for name in ("t1_us", "t2_us", "tg1_ns", "tg2_ns"):
            v = getattr(self, name)
            if not v > 0:
                raise NoiseModelError(f"{name} must be positive, got {v}")
        if self.t2_us > 2 * self.t1_us:
            raise NoiseModelError("T2 cannot exceed 2 T1")
        for name in ("p00", "p01", "p10", "p11"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise NoiseModelError(f"{name} must be a probability, got {v}")
        for row, (a, b) in enumerate(((self.p00, self.p01), (self.p10, self.p11))):
            if abs(a + b - 1.0) > STOCHASTIC_TOL:
                raise NoiseModelError(f"confusion row {row} sums to {a + b}, not 1")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        """No relaxation and perfect readout."""
        return cls(math.inf, math.inf, 0.02, 0.1, 1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_mapping(cls, cfg: Mapping) -> "NoiseModel":
        known = {f.name for f in fields(cls)}
        unknown = set(cfg) - known
        if unknown:
            raise NoiseModelError(f"unknown noise keys: {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in cfg.items()})

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def confusion(self) -> np.ndarray:
        return np.array([[self.p00, self.p01], [self.p10, self.p11]])

    def gate_time_us(self, g: Gate) -> float:
        return (self.tg2_ns if len(g.qubits) == 2 else self.tg1_ns) * 1e-3


def relaxation_kraus(t_us: float, t1_us: float, t2_us: float) -> list[np.ndarray]:
    """Kraus operators of amplitude damping followed by pure dephasing over ``t_us``."""
    if t_us < 0:
        raise ValueError("duration must be non-negative")
    if t2_us > 2 * t1_us:
        raise NoiseModelError("T2 cannot exceed 2 T1")
    p = -math.expm1(-t_us / t1_us)
    rate_phi = 1.0 / t2_us - 1.0 / (2.0 * t1_us)
    lam = -math.expm1(-2.0 * t_us * rate_phi)
    amp = [np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - p)]]), np.array([[0.0, math.sqrt(p)], [0.0, 0.0]])]
    phase = [np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - lam)]]), np.array([[0.0, 0.0], [0.0, math.sqrt(lam)]])]
    return [b @ a for b in phase for a in amp]


def kraus_completeness(kraus: Iterable[np.ndarray]) -> float:
    """``max |sum K^dag K - I|``; zero for a trace-preserving channel."""
    kraus = list(kraus)
    total = sum(k.conj().T @ k for k in kraus)
    return float(np.abs(total - np.eye(total.shape[0])).max())


class DensityMatrix:
    """Mixed state of at most ``MAX_DM_QUBITS`` qubits, stored densely."""

    __slots__ = ("n_qubits", "data")

    def __init__(self, data):
        data = np.array(data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(data.shape[0]).bit_length() - 1
        if n < 1 or 2**n != data.shape[0]:
            raise ValueError("dimension must be a power of two")
        if n > MAX_DM_QUBITS:
            raise ValueError(f"density matrices are limited to {MAX_DM_QUBITS} qubits")
        self.n_qubits = n
        self.data = data

    @classmethod
    def from_state(cls, s: StateVector) -> "DensityMatrix":
        psi = s.amplitudes
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        dim = 2**n_qubits
        return cls(np.eye(dim) / dim)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.data.copy())

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.data).real, 0.0, None)

    def check(self, tol: float = 1e-10, eig_tol: float = 1e-9) -> None:
        """Raise ``ValueError`` unless Hermitian, unit trace and positive semidefinite."""
        if np.abs(self.data - self.data.conj().T).max() > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(self.data) - 1.0) > tol:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(self.data).min() < -eig_tol:
            raise ValueError("density matrix has a negative eigenvalue")

    def _tensor(self) -> np.ndarray:
        return self.data.reshape((2,) * (2 * self.n_qubits))

    def _store(self, t: np.ndarray) -> None:
        dim = 2**self.n_qubits
        self.data = np.ascontiguousarray(t.reshape(dim, dim))

    def apply_unitary(self, u: np.ndarray, qubits: Sequence[int]) -> None:
        n = self.n_qubits
        t = apply_unitary(self._tensor(), u, qubits)
        t = apply_unitary(t, u.conj(), [n + q for q in qubits])
        self._store(t)

    def apply_channel(self, kraus: Sequence[np.ndarray], qubit: int) -> None:
        n = self.n_qubits
        t = self._tensor()
        out = np.zeros_like(t)
        for k in kraus:
            out += apply_unitary(apply_unitary(t, k, [qubit]), k.conj(), [n + qubit])
        self._store(out)


def apply_gate_noisy(rho: DensityMatrix, g: Gate, nm: NoiseModel) -> DensityMatrix:
    """Ideal gate, then thermal relaxation on each qubit the gate touches."""
    if max(g.qubits) >= rho.n_qubits:
        raise ValueError("gate acts outside the density matrix")
    out = rho.copy()
    out.apply_unitary(g.matrix(), g.qubits)
    if math.isinf(nm.t1_us) and math.isinf(nm.t2_us):
        return out
    kraus = relaxation_kraus(nm.gate_time_us(g), nm.t1_us, nm.t2_us)
    for q in g.qubits:
        out.apply_channel(kraus, q)
    return out


def readout_distribution(probs: np.ndarray, n_qubits: int, confusion: np.ndarray) -> np.ndarray:
    """Push a bitstring distribution through the same confusion matrix on every qubit."""
    t = np.asarray(probs, dtype=float).reshape((2,) * n_qubits)
    for q in range(n_qubits):
        t = np.moveaxis(np.tensordot(t, confusion, axes=([q], [0])), -1, q)
    return t.reshape(-1)


def measure_energy_noisy(rho: DensityMatrix, h: Hamiltonian, nm: NoiseModel) -> float:
    if not h.is_diagonal():
        raise ValueError("noisy energy measurement needs a diagonal Hamiltonian")
    if h.n_qubits != rho.n_qubits:
        raise ValueError("density matrix and Hamiltonian sizes differ")
    p = readout_distribution(rho.probabilities(), rho.n_qubits, nm.confusion)
    return float(np.dot(p, h.diagonal()))


def replay(
    circuits: Sequence[Circuit],
    h: Hamiltonian,
    nm: NoiseModel,
    initial: StateVector | None = None,
) -> tuple[float, float]:
    """``(ideal energy, noisy energy)`` after running every circuit in order from ``initial``.

    The ideal value uses the exact state and perfect readout.
    """
    n = h.n_qubits
    if n > MAX_DM_QUBITS:
        raise ValueError(f"noisy replay is limited to {MAX_DM_QUBITS} qubits")
    s = initial.copy() if initial is not None else uniform_init(n)
    rho = DensityMatrix.from_state(s)
    for c in circuits:
        if c.n_qubits != n:
            raise ValueError("circuit and Hamiltonian sizes differ")
        s = c.apply(s)
        for g in c.gates:
            rho = apply_gate_noisy(rho, g, nm)
    return h.energy(s), measure_energy_noisy(rho, h, nm)
