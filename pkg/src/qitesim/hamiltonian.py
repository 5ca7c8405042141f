"""Graphs, max-cut Hamiltonians and their (diagonal) spectra."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .pauli import DimensionError, PauliString
from .statevec import StateVector

SPECTRUM_MAX_QUBITS = 24
LEVEL_TOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph; edge order fixes the Hamiltonian term order."""

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        edges = tuple((int(i), int(j), float(w)) for i, j, w in self.edges)
        seen = set()
        for i, j, _ in edges:
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValueError(f"edge ({i}, {j}) has a vertex outside 0..{self.n_vertices - 1}")
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            key = frozenset((i, j))
            if key in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add(key)
        object.__setattr__(self, "edges", edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def cut_value(self, side: int) -> float:
        """Total weight of edges cut by the vertex bipartition ``side`` (bit ``v`` -> vertex ``v``)."""
        return sum(w for i, j, w in self.edges if ((side >> i) ^ (side >> j)) & 1)

    @classmethod
    def from_file(cls, path) -> "Graph":
        return parse_graph(Path(path).read_text())

    def to_text(self) -> str:
        lines = [f"n {self.n_vertices}"]
        lines += [f"{i} {j} {w!r}" for i, j, w in self.edges]
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Parse ``n <count>`` followed by ``i j [weight]`` lines (weight defaults to 1)."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if parts[0] != "n" or len(parts) != 2:
                raise ValueError(f"line {lineno}: expected header 'n <n_vertices>'")
            n = int(parts[1])
            continue
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 'i j [weight]'")
        w = float(parts[2]) if len(parts) == 3 else 1.0
        edges.append((int(parts[0]), int(parts[1]), w))
    if n is None:
        raise ValueError("graph file has no 'n <n_vertices>' header")
    return Graph(n, tuple(edges))


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, tuple((i, j, 1.0) for i, j in outer + spokes + inner))


def complete_graph(n: int, weight: float = 1.0) -> Graph:
    return Graph(n, tuple((i, j, weight) for i, j in combinations(range(n), 2)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n, 1.0) for i in range(n)))


def random_regular_pairing(n: int, degree: int, rng: np.random.Generator, max_tries: int = 10000) -> Graph:
    """Uniform random simple ``degree``-regular graph from the pairing model."""
    if n * degree % 2 or degree >= n:
        raise ValueError(f"no simple {degree}-regular graph on {n} vertices")
    points = np.repeat(np.arange(n), degree)
    for _ in range(max_tries):
        perm = rng.permutation(points)
        pairs = perm.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = {(min(a, b), max(a, b)) for a, b in pairs.tolist()}
        if len(keys) == len(pairs):
            return Graph(n, tuple((a, b, 1.0) for a, b in sorted(keys)))
    raise RuntimeError("pairing model failed to produce a simple graph")


def generate_graph(kind: str, n: int | None = None, seed: int = 0) -> Graph:
    """Build ``petersen``, ``random_3_regular`` or ``complete_weighted`` graphs."""
    if kind == "petersen":
        if n not in (None, 10):
            raise ValueError("the Petersen graph has 10 vertices")
        return petersen()
    if kind == "random_3_regular":
        if n is None or n < 4 or n % 2:
            raise ValueError("random_3_regular needs an even vertex count >= 4")
        return random_regular_pairing(n, 3, np.random.default_rng(seed))
    if kind == "complete_weighted":
        if n is None or n < 2:
            raise ValueError("complete_weighted needs at least 2 vertices")
        rng = np.random.default_rng(seed)
        pairs = list(combinations(range(n), 2))
        weights = rng.uniform(0.0, 1.0, size=len(pairs))
        return Graph(n, tuple((i, j, float(w)) for (i, j), w in zip(pairs, weights)))
    raise ValueError(f"unknown graph kind {kind!r}")


def named_graph(name: str) -> Graph:
    table = {
        "petersen": petersen,
        "k4": lambda: complete_graph(4),
        "c4": lambda: cycle_graph(4),
        "edge": lambda: Graph(2, ((0, 1, 1.0),)),
    }
    try:
        return table[name]()
    except KeyError:
        raise ValueError(f"unknown named graph {name!r}") from None


@dataclass(frozen=True)
class Hamiltonian:
    """``constant + sum_m coeff_m * P_m``; one term per partial Hamiltonian."""

    n_qubits: int
    constant: float
    terms: tuple[tuple[float, PauliString], ...]
    _diag: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for _, p in self.terms:
            if p.n_qubits != self.n_qubits:
                raise DimensionError("term acts on the wrong number of qubits")

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def is_diagonal(self) -> bool:
        return all(p.is_diagonal() for _, p in self.terms)

    def term_diagonal(self, m: int) -> np.ndarray:
        """Diagonal of ``coeff_m * P_m`` (no constant)."""
        coeff, p = self.terms[m]
        if not p.is_diagonal():
            raise ValueError("term is not diagonal")
        idx = np.arange(1 << self.n_qubits, dtype=np.uint64)
        return coeff * (1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(p.z_mask)) & 1))

    def diagonal(self) -> np.ndarray:
        """Energy of every basis state, constant included."""
        if self._diag is None:
            if not self.is_diagonal():
                raise ValueError("Hamiltonian is not diagonal")
            if self.n_qubits > SPECTRUM_MAX_QUBITS:
                raise ValueError(f"diagonal of {self.n_qubits} qubits exceeds cap {SPECTRUM_MAX_QUBITS}")
            d = np.full(1 << self.n_qubits, self.constant)
            for m in range(self.n_terms):
                d += self.term_diagonal(m)
            d.setflags(write=False)
            object.__setattr__(self, "_diag", d)
        return self._diag

    def energy(self, s: StateVector) -> float:
        if s.n_qubits != self.n_qubits:
            raise DimensionError("state and Hamiltonian sizes differ")
        return float(np.dot(s.probabilities(), self.diagonal()))


def maxcut_hamiltonian(g: Graph) -> Hamiltonian:
    """``H = -sum_{(i,j)} d_ij (1 - Z_i Z_j) / 2``, one ZZ term per edge in edge order."""
    constant = 0.0
    terms = []
    for i, j, w in g.edges:
        constant -= w / 2
        terms.append((w / 2, PauliString.from_letters(g.n_vertices, {i: "Z", j: "Z"})))
    return Hamiltonian(g.n_vertices, constant, tuple(terms))


@dataclass(frozen=True)
class Spectrum:
    energies: np.ndarray
    ground_energy: float
    ground_states: tuple[int, ...]
    levels: np.ndarray = field(repr=False)
    level_index: np.ndarray = field(repr=False)

    @property
    def n_qubits(self) -> int:
        return self.energies.size.bit_length() - 1

    def degeneracies(self) -> list[tuple[float, int]]:
        counts = np.bincount(self.level_index, minlength=len(self.levels))
        return [(float(e), int(c)) for e, c in zip(self.levels, counts)]


def brute_force_spectrum(h: Hamiltonian) -> Spectrum:
    if h.n_qubits > SPECTRUM_MAX_QUBITS:
        raise ValueError(f"{h.n_qubits} qubits exceeds the enumeration cap of {SPECTRUM_MAX_QUBITS}")
    energies = h.diagonal()
    order = np.argsort(energies, kind="stable")
    sorted_e = energies[order]
    # consecutive sorted energies closer than LEVEL_TOL share a level
    new_level = np.concatenate(([True], np.diff(sorted_e) > LEVEL_TOL))
    ids_sorted = np.cumsum(new_level) - 1
    level_index = np.empty_like(ids_sorted)
    level_index[order] = ids_sorted
    levels = sorted_e[new_level]
    ground = float(sorted_e[0])
    ground_states = tuple(int(x) for x in np.flatnonzero(level_index == 0))
    return Spectrum(energies, ground, ground_states, levels, level_index)


def spectral_decomposition(s: StateVector, spec: Spectrum) -> list[tuple[float, float]]:
    """Weight ``n(E)`` of ``s`` on every energy level, ascending in ``E``."""
    if s.dim != spec.energies.size:
        raise DimensionError("state and spectrum sizes differ")
    n = np.bincount(spec.level_index, weights=s.probabilities(), minlength=len(spec.levels))
    return [(float(e), float(w)) for e, w in zip(spec.levels, n)]


def bits_of(index: int, n_qubits: int) -> list[int]:
    """Per-qubit bit values of a basis index, qubit 0 first."""
    return [(index >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
