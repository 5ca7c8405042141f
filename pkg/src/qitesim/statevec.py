"""Dense state vectors over the big-endian computational basis."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .pauli import DimensionError, PauliString, PhasedPauli

MAX_QUBITS = 24
NORM_TOL = 1e-12


class CapacityError(ValueError):
    """Requested register exceeds what a dense vector can hold here."""


class NumericUnderflowError(ArithmeticError):
    pass


def masks(strings: Sequence[PauliString]) -> tuple[np.ndarray, np.ndarray]:
    """Pack strings into ``uint64`` x/z mask arrays for the kernels."""
    xs = np.fromiter((p.x_mask for p in strings), dtype=np.uint64, count=len(strings))
    zs = np.fromiter((p.z_mask for p in strings), dtype=np.uint64, count=len(strings))
    return xs, zs


class StateVector:
    """Unit-norm vector of ``2**n_qubits`` complex amplitudes."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes, *, normalize: bool = False):
        amps = np.array(amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size < 2 or amps.size & (amps.size - 1):
            raise DimensionError("amplitude count must be a power of two >= 2")
        n = amps.size.bit_length() - 1
        if n > MAX_QUBITS:
            raise CapacityError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
        nrm = np.linalg.norm(amps)
        if normalize:
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps /= nrm
        elif abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm {nrm})")
        self.n_qubits = n
        self.amplitudes = amps

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def copy(self) -> "StateVector":
        out = object.__new__(StateVector)
        out.n_qubits = self.n_qubits
        out.amplitudes = self.amplitudes.copy()
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def renormalize(self) -> None:
        self.amplitudes /= np.linalg.norm(self.amplitudes)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def fidelity(self, other: "StateVector") -> float:
        _check(self, other.n_qubits)
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def is_real(self) -> bool:
        return not np.any(self.amplitudes.imag)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "real", "imag"])
            for i, a in enumerate(self.amplitudes):
                w.writerow([i, repr(float(a.real)), repr(float(a.imag))])

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits})"


def _check(s: StateVector, n_qubits: int) -> None:
    if s.n_qubits != n_qubits:
        raise DimensionError(f"state has {s.n_qubits} qubits, operator has {n_qubits}")


def uniform_init(n_qubits: int) -> StateVector:
    """Equal-weight superposition of every basis state."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    dim = 1 << n_qubits
    return StateVector(np.full(dim, 2.0 ** (-n_qubits / 2), dtype=np.complex128))


def basis_state(n_qubits: int, index: int) -> StateVector:
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps)


def apply_pauli(s: StateVector, p: PauliString | PhasedPauli) -> StateVector:
    pp = PhasedPauli.of(p)
    _check(s, pp.n_qubits)
    xs, zs = masks([pp.string])
    col = kernels.pauli_columns(s.amplitudes, xs, zs)[:, 0]
    out = object.__new__(StateVector)
    out.n_qubits = s.n_qubits
    out.amplitudes = pp.phase * col
    return out


def apply_rotation(s: StateVector, p: PauliString, theta: float) -> StateVector:
    """``exp(-i theta p) s``, computed as ``cos(theta) s - i sin(theta) p s``."""
    _check(s, p.n_qubits)
    if not math.isfinite(theta):
        raise ValueError(f"rotation angle must be finite, got {theta}")
    out = s.copy()
    xs, zs = masks([p])
    kernels.apply_rotations(out.amplitudes, xs, zs, np.array([float(theta)]))
    return out


def apply_rotations_inplace(s: StateVector, xs: np.ndarray, zs: np.ndarray, thetas: np.ndarray) -> None:
    """Apply ``exp(-i theta_r P_r)`` for each row in order; zero angles are skipped."""
    thetas = np.ascontiguousarray(thetas, dtype=float)
    if not np.all(np.isfinite(thetas)):
        raise ValueError("rotation angles must be finite")
    kernels.apply_rotations(s.amplitudes, xs, zs, thetas)


def expectation(s: StateVector, p: PauliString | PhasedPauli) -> complex:
    pp = PhasedPauli.of(p)
    _check(s, pp.n_qubits)
    xs, zs = masks([pp.string])
    return complex(pp.phase * kernels.pauli_expectations(s.amplitudes, xs, zs)[0])


def diagonal_expectation(s: StateVector, energies: np.ndarray) -> float:
    """``<s|H|s>`` for a Hamiltonian given by its diagonal."""
    if len(energies) != s.dim:
        raise DimensionError("energy table does not match state dimension")
    return float(np.dot(s.probabilities(), energies))


def exact_ite(s0: StateVector, energies: np.ndarray, tau: float) -> StateVector:
    """Normalized ``exp(-tau H) s0`` for diagonal ``H``.

    Exponents are shifted by the smallest ``tau * E`` over the support of
    ``s0`` so that no surviving amplitude underflows.
    """
    energies = np.asarray(energies, dtype=float)
    if energies.shape != (s0.dim,):
        raise DimensionError("energy table does not match state dimension")
    if tau < 0 or not math.isfinite(tau):
        raise ValueError("tau must be finite and non-negative")
    if tau == 0:
        return s0.copy()
    occupied = s0.amplitudes != 0
    expo = -tau * energies
    expo = expo - expo[occupied].max()
    amps = np.where(occupied, s0.amplitudes * np.exp(expo), 0)
    nrm = np.linalg.norm(amps)
    if nrm == 0 or not np.isfinite(nrm):
        raise NumericUnderflowError(
            "all amplitudes vanished; rescale energies by subtracting their minimum"
        )
    out = object.__new__(StateVector)
    out.n_qubits = s0.n_qubits
    out.amplitudes = amps / nrm
    return out
