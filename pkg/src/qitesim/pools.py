"""Expansion pools for the Hermitian generator of each unitarized step.

Methods:

``LA``    per-term strings on the term's qubits plus every qubit coupled to
          them (the domain size is dictated by the Hamiltonian).
``eLA``   per-term strings on the term's qubits plus any ``D - k`` of the
          coupled qubits.
``NLA``   one shared pool of every string of weight ``1..D``.
``NLA25`` shared pool: all weight <= 2 strings plus every per-term eLA-D3
          string.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from pathlib import Path

import numpy as np

from .hamiltonian import Hamiltonian
from .pauli import PauliString, strings_on, strings_up_to_weight

METHODS = ("LA", "eLA", "NLA", "NLA25")
_ALIASES = {m.lower(): m for m in METHODS}


class DomainSizeError(ValueError):
    pass


def canonical_method(name: str) -> str:
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}") from None


@dataclass(frozen=True)
class DomainSpec:
    """Pool recipe. ``D=None`` means the natural choice (LA) or is unused (NLA25)."""

    method: str
    D: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        if self.D is not None and self.D < 1:
            raise DomainSizeError("domain size must be positive")

    @property
    def per_term(self) -> bool:
        return self.method in ("LA", "eLA")

    @property
    def label(self) -> str:
        if self.method == "NLA25":
            return "NLA-D2.5"
        return f"{self.method}-D{self.D}" if self.D is not None else self.method


@dataclass(frozen=True)
class Pool:
    """Canonically ordered, duplicate-free, identity-free list of strings."""

    strings: tuple[PauliString, ...]
    xs: np.ndarray = field(init=False, repr=False, compare=False)
    zs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        strings = tuple(sorted(set(self.strings)))
        if any(p.is_identity() for p in strings):
            raise ValueError("identity string in pool")
        object.__setattr__(self, "strings", strings)
        xs = np.fromiter((p.x_mask for p in strings), dtype=np.uint64, count=len(strings))
        zs = np.fromiter((p.z_mask for p in strings), dtype=np.uint64, count=len(strings))
        xs.setflags(write=False)
        zs.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "zs", zs)

    def __len__(self) -> int:
        return len(self.strings)

    def __iter__(self):
        return iter(self.strings)

    def __contains__(self, p) -> bool:
        return p in self.as_set()

    def as_set(self) -> frozenset[PauliString]:
        return frozenset(self.strings)

    def labels(self) -> list[str]:
        return [p.label for p in self.strings]

    def dump(self, path) -> None:
        Path(path).write_text("".join(p.label + "\n" for p in self.strings))


def term_support(h: Hamiltonian, m: int) -> frozenset[int]:
    return h.terms[m][1].support()


def interaction_set(h: Hamiltonian, m: int) -> frozenset[int]:
    """Qubits outside term ``m`` that another term couples to term ``m``'s qubits."""
    if not 0 <= m < h.n_terms:
        raise IndexError(f"term index {m} out of range")
    own = term_support(h, m)
    out: set[int] = set()
    for mp in range(h.n_terms):
        if mp == m:
            continue
        other = term_support(h, mp)
        if other & own:
            out |= other - own
    return frozenset(out)


def _term_k(h: Hamiltonian, m: int) -> int:
    return len(term_support(h, m))


def validate(spec: DomainSpec, h: Hamiltonian) -> None:
    """Raise ``DomainSizeError`` if ``spec`` is not defined for ``h``."""
    n = h.n_qubits
    if spec.method == "LA":
        if spec.D is None:
            return
        full = all(spec.D == _term_k(h, m) + len(interaction_set(h, m)) for m in range(h.n_terms))
        bare = all(spec.D == _term_k(h, m) for m in range(h.n_terms))
        if not (full or bare):
            raise DomainSizeError(
                f"domain size invalid for LA: D={spec.D} must equal k + |L_m| for every term"
            )
    elif spec.method == "eLA":
        if spec.D is None:
            raise DomainSizeError("domain size invalid for eLA: D is required")
        for m in range(h.n_terms):
            k = _term_k(h, m)
            hi = k + len(interaction_set(h, m))
            if not k <= spec.D <= hi:
                raise DomainSizeError(
                    f"domain size invalid for eLA: term {m} needs {k} <= D <= {hi}, got D={spec.D}"
                )
    elif spec.method == "NLA":
        if spec.D is None or not 1 <= spec.D <= n:
            raise DomainSizeError(f"domain size invalid for NLA: need 1 <= D <= {n}, got {spec.D}")
    elif spec.method == "NLA25":
        if spec.D not in (None, 2, 3):
            raise DomainSizeError("NLA25 takes no domain size")


def _local_strings(h: Hamiltonian, m: int, extra: int) -> set[PauliString]:
    own = term_support(h, m)
    neigh = sorted(interaction_set(h, m))
    out: set[PauliString] = set()
    for chosen in combinations(neigh, extra):
        out.update(strings_on(h.n_qubits, own | set(chosen)))
    return out


def build_pool(spec: DomainSpec, h: Hamiltonian, m: int | None = None) -> Pool:
    validate(spec, h)
    if spec.per_term:
        if m is None:
            raise ValueError(f"{spec.method} pools are per term; pass a term index")
        k = _term_k(h, m)
        n_l = len(interaction_set(h, m))
        if spec.method == "LA":
            extra = 0 if spec.D is not None and spec.D == k and n_l > 0 else n_l
        else:
            extra = spec.D - k
        return Pool(tuple(_local_strings(h, m, extra)))
    if m is not None:
        raise ValueError(f"{spec.method} uses one shared pool; term index not accepted")
    if spec.method == "NLA":
        return Pool(tuple(strings_up_to_weight(h.n_qubits, spec.D)))
    # NLA25
    out = set(strings_up_to_weight(h.n_qubits, 2))
    for mm in range(h.n_terms):
        extra = min(1, len(interaction_set(h, mm)))
        out.update(_local_strings(h, mm, extra))
    return Pool(tuple(out))


def build_pools(spec: DomainSpec, h: Hamiltonian) -> list[Pool]:
    """Pool used by each term, in term order; shared methods repeat one object."""
    if spec.per_term:
        return [build_pool(spec, h, m) for m in range(h.n_terms)]
    shared = build_pool(spec, h)
    return [shared] * h.n_terms


def nominal_domain(spec: DomainSpec, h: Hamiltonian) -> int:
    """Domain size that enters the closed-form scalings."""
    if spec.method == "NLA25":
        return 3
    if spec.D is not None:
        return spec.D
    return max(_term_k(h, m) + len(interaction_set(h, m)) for m in range(h.n_terms))


def pool_size_scaling(spec: DomainSpec, n_bit: int, n_ham: int, D: int | None = None) -> tuple[int, Fraction]:
    """Closed-form linear-system size and gate operations per qubit.

    Per-term methods: ``4^D`` and ``4^D * n_ham * D / n_bit``.
    Shared methods: ``4^D * C(n_bit, D)`` and ``4^D * C(n_bit - 1, D - 1)``.
    """
    D = D if D is not None else (3 if spec.method == "NLA25" else spec.D)
    if D is None or n_bit < 1 or n_ham < 0:
        raise ValueError("scaling needs positive D and n_bit")
    if spec.per_term:
        return 4**D, Fraction(4**D * n_ham * D, n_bit)
    return 4**D * comb(n_bit, D), Fraction(4**D * comb(n_bit - 1, D - 1))


def nla_pool_count(n_bit: int, D: int) -> int:
    return sum(comb(n_bit, w) * 3**w for w in range(1, D + 1))
