"""N-qubit Pauli strings stored as X/Z bitmasks.

Qubit 0 is the leftmost tensor factor. Masks are big-endian so that the
integer reads like the label: for ``"XIZ"`` the x-mask is ``0b100`` and the
z-mask is ``0b001``. The same bit layout indexes computational basis states
in :mod:`qitesim.statevec`.

A string with masks ``(x, z)`` denotes ``i**popcount(x & z) * X^x Z^z``,
which is exactly the tensor product of the single-qubit letters
(``Y = i X Z``).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Iterator

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASES = (1, 1j, -1, -1j)


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of single-qubit Paulis.

    Ordering compares ``(n_qubits, x_mask, z_mask)`` lexicographically, which
    is the canonical order used for pools.
    """

    n_qubits: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_mask < 0 or self.z_mask < 0 or (self.x_mask | self.z_mask) & ~full:
            raise ValueError("mask has bits outside the register")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"XIZY"``; any other character raises ``ValueError``."""
        label = label.strip().upper()
        if not label:
            raise ValueError("empty Pauli label")
        x = z = 0
        for ch in label:
            try:
                xb, zb = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            x = (x << 1) | xb
            z = (z << 1) | zb
        return cls(len(label), x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_letters(cls, n_qubits: int, letters: dict[int, str]) -> "PauliString":
        """Build a string from ``{qubit: letter}``; unlisted qubits are I."""
        x = z = 0
        for q, ch in letters.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} outside register of {n_qubits}")
            xb, zb = _LETTER_BITS[ch]
            bit = 1 << (n_qubits - 1 - q)
            if xb:
                x |= bit
            if zb:
                z |= bit
        return cls(n_qubits, x, z)

    def _bit(self, q: int) -> int:
        return 1 << (self.n_qubits - 1 - q)

    def letter(self, q: int) -> str:
        b = self._bit(q)
        return _BITS_LETTER[(int(bool(self.x_mask & b)), int(bool(self.z_mask & b)))]

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def support(self) -> frozenset[int]:
        m = self.x_mask | self.z_mask
        return frozenset(q for q in range(self.n_qubits) if m & self._bit(q))

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def n_y(self) -> int:
        return _popcount(self.x_mask & self.z_mask)

    def is_identity(self) -> bool:
        return not (self.x_mask | self.z_mask)

    def is_diagonal(self) -> bool:
        return self.x_mask == 0

    def commutes_with(self, other: "PauliString") -> bool:
        _check_dims(self, other)
        return (_popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)) % 2 == 0

    def __mul__(self, other: "PauliString") -> "PhasedPauli":
        return multiply(self, other)

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


@dataclass(frozen=True)
class PhasedPauli:
    """``i**power * string`` with ``power`` in ``{0, 1, 2, 3}``."""

    power: int
    string: PauliString

    def __post_init__(self):
        object.__setattr__(self, "power", self.power % 4)

    @property
    def phase(self) -> complex:
        return _PHASES[self.power]

    @property
    def n_qubits(self) -> int:
        return self.string.n_qubits

    @classmethod
    def of(cls, p: "PauliString | PhasedPauli") -> "PhasedPauli":
        return p if isinstance(p, PhasedPauli) else cls(0, p)

    def __mul__(self, other: "PhasedPauli | PauliString") -> "PhasedPauli":
        other = PhasedPauli.of(other)
        prod = multiply(self.string, other.string)
        return PhasedPauli(self.power + other.power + prod.power, prod.string)

    def __str__(self) -> str:
        return f"{('+', '+i', '-', '-i')[self.power]}{self.string.label}"


def _check_dims(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"cannot combine {a.n_qubits}- and {b.n_qubits}-qubit strings")


def multiply(a: PauliString, b: PauliString) -> PhasedPauli:
    """Exact product ``a @ b`` with its global phase."""
    _check_dims(a, b)
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    # X^x1 Z^z1 X^x2 Z^z2 = (-1)^{z1.x2} X^x Z^z, then re-absorb the Y phases.
    power = (
        _popcount(a.x_mask & a.z_mask)
        + _popcount(b.x_mask & b.z_mask)
        - _popcount(x & z)
        + 2 * _popcount(a.z_mask & b.x_mask)
    )
    return PhasedPauli(power, PauliString(a.n_qubits, x, z))


def support(p: PauliString) -> frozenset[int]:
    return p.support()


def weight(p: PauliString) -> int:
    return p.weight


def strings_on(n_qubits: int, qubits: Iterable[int], *, exact: bool = False) -> Iterator[PauliString]:
    """All strings supported inside ``qubits``.

    With ``exact=True`` only strings whose support equals ``qubits`` are
    produced; the identity is never produced.
    """
    qubits = sorted(set(qubits))
    letters = "XYZ" if exact else "IXYZ"
    for combo in product(letters, repeat=len(qubits)):
        p = PauliString.from_letters(n_qubits, dict(zip(qubits, combo)))
        if not p.is_identity():
            yield p


def strings_up_to_weight(n_qubits: int, max_weight: int) -> Iterator[PauliString]:
    """All non-identity strings of weight ``1..max_weight``."""
    for w in range(1, min(max_weight, n_qubits) + 1):
        for qs in combinations(range(n_qubits), w):
            yield from strings_on(n_qubits, qs, exact=True)


def to_matrix(p: PauliString | PhasedPauli):
    """Dense ``2^n x 2^n`` matrix (for testing and small cross-checks)."""
    import numpy as np

    pp = PhasedPauli.of(p)
    mats = {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    out = np.array([[1.0 + 0j]])
    for ch in pp.string.label:
        out = np.kron(out, mats[ch])
    return pp.phase * out
