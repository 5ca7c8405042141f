"""Gate-level compilation of Pauli rotations and circuit resource counts.

A rotation ``exp(-i theta P)`` compiles to basis changes (H for X, RX(pi/2)
for Y), a CNOT ladder over the support in ascending qubit order, ``RZ(2 theta)``
on the last support qubit, then the mirror image. Connectivity is all-to-all.

Gate conventions: ``RZ(phi) = exp(-i phi Z / 2)``, ``RX(phi) = exp(-i phi X / 2)``,
CNOT lists the control first. Qubit 0 is the most significant bit of a basis
index, as everywhere else in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .hamiltonian import Hamiltonian
from .pauli import PauliString
from .pools import DomainSpec, Pool, build_pools, interaction_set, nominal_domain, pool_size_scaling, term_support
from .statevec import StateVector

GATE_KINDS = ("H", "RX", "RZ", "CNOT")
HALF_PI = math.pi / 2

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {self.qubits}")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ValueError("CNOT control and target must differ")
        if min(self.qubits) < 0:
            raise ValueError("negative qubit index")
        if not math.isfinite(self.angle):
            raise ValueError("gate angle must be finite")
        if self.kind == "RX" and not math.isclose(abs(self.angle), HALF_PI):
            raise ValueError("RX is only used as a basis change with angle +-pi/2")

    def matrix(self) -> np.ndarray:
        if self.kind == "H":
            return _H
        if self.kind == "CNOT":
            return _CNOT
        c, s = math.cos(self.angle / 2), math.sin(self.angle / 2)
        if self.kind == "RX":
            return np.array([[c, -1j * s], [-1j * s, c]])
        return np.diag([c - 1j * s, c + 1j * s])

    def inverse(self) -> "Gate":
        if self.kind in ("RX", "RZ"):
            return Gate(self.kind, self.qubits, -self.angle)
        return self

    def to_text(self) -> str:
        parts = [self.kind, *map(str, self.qubits)]
        if self.kind in ("RX", "RZ"):
            parts.append(repr(float(self.angle)))
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> "Gate":
        parts = line.split()
        if not parts:
            raise ValueError("empty gate line")
        kind = parts[0].upper()
        arity = 2 if kind == "CNOT" else 1
        qubits = tuple(int(t) for t in parts[1 : 1 + arity])
        angle = float(parts[1 + arity]) if kind in ("RX", "RZ") else 0.0
        return cls(kind, qubits, angle)


def apply_unitary(tensor: np.ndarray, u: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a ``2^k x 2^k`` matrix into the given axes of a ``(2,)*n`` tensor."""
    k = len(axes)
    u = u.reshape((2,) * (2 * k))
    out = np.tensordot(u, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        self.gates = list(self.gates)
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        if max(g.qubits) >= self.n_qubits:
            raise ValueError(f"gate {g.to_text()} exceeds {self.n_qubits} qubits")

    def append(self, g: Gate) -> None:
        self._check(g)
        self.gates.append(g)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.append(g)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def counts(self) -> dict[str, int]:
        out = dict.fromkeys(GATE_KINDS, 0)
        for g in self.gates:
            out[g.kind] += 1
        return out

    def depth(self) -> int:
        return depth(self)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)])

    def apply(self, s: StateVector) -> StateVector:
        if s.n_qubits != self.n_qubits:
            raise ValueError("state and circuit sizes differ")
        t = s.amplitudes.reshape((2,) * self.n_qubits)
        for g in self.gates:
            t = apply_unitary(t, g.matrix(), g.qubits)
        return StateVector(t.reshape(-1).copy())

    def unitary(self) -> np.ndarray:
        dim = 2**self.n_qubits
        cols = [self.apply(StateVector(np.eye(dim, dtype=complex)[:, k])).amplitudes for k in range(dim)]
        return np.stack(cols, axis=1)

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates)

    def dump(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, n_qubits: int, text: str) -> "Circuit":
        return cls(n_qubits, [Gate.from_text(ln) for ln in text.splitlines() if ln.strip()])


def depth(c: Circuit) -> int:
    """Greedy per-qubit frontier schedule: each gate starts after every gate on its qubits."""
    front = [0] * c.n_qubits
    for g in c.gates:
        level = max(front[q] for q in g.qubits) + 1
        for q in g.qubits:
            front[q] = level
    return max(front, default=0)


def compile_rotation(p: PauliString, theta: float) -> Circuit:
    """Circuit for ``exp(-i theta p)``."""
    if p.is_identity():
        raise ValueError("cannot compile a rotation by the identity string")
    if not math.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    qs = sorted(p.support())
    pre, post = [], []
    for q in qs:
        letter = p.letter(q)
        if letter == "X":
            pre.append(Gate("H", (q,)))
            post.append(Gate("H", (q,)))
        elif letter == "Y":
            pre.append(Gate("RX", (q,), HALF_PI))
            post.append(Gate("RX", (q,), -HALF_PI))
    ladder = [Gate("CNOT", (a, b)) for a, b in zip(qs, qs[1:])]
    gates = pre + ladder + [Gate("RZ", (qs[-1],), 2.0 * theta)] + ladder[::-1] + post
    return Circuit(p.n_qubits, gates)


def rotation_gate_count(p: PauliString) -> int:
    w = p.weight
    return 2 * (w - 1) + 1 + 2 * bin(p.x_mask).count("1")


def compile_program(n_qubits: int, rotations: Iterable[tuple[PauliString, float]]) -> Circuit:
    c = Circuit(n_qubits)
    for p, theta in rotations:
        c.gates.extend(compile_rotation(p, theta).gates)
    return c


def trajectory_circuits(traj) -> list[Circuit]:
    """Circuits that reproduce the rotations a run applied.

    Compressed runs give one circuit per block. Uncompressed runs must be
    recorded with ``record_program=True`` and give one circuit per step.
    """
    n = traj.hamiltonian.n_qubits
    if traj.compressed:
        pool = traj.pools[0]
        return [
            compile_program(n, ((p, traj.dtau * a) for p, a in zip(pool.strings, blk.a_sum) if a != 0.0))
            for blk in traj.blocks
        ]
    if traj.program is None:
        raise ValueError("run was not recorded; pass record_program=True")
    per_step = max(traj.hamiltonian.n_terms, 1)
    out = []
    for start in range(0, len(traj.program), per_step):
        rot = [
            (PauliString(n, int(x), int(z)), float(t))
            for xs, zs, ts in traj.program[start : start + per_step]
            for x, z, t in zip(xs, zs, ts)
        ]
        out.append(compile_program(n, rot))
    return out


def _strings_on_masks(n_qubits: int, qubits: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Masks of every non-identity string supported inside ``qubits``, canonical order."""
    qs = sorted(qubits)
    codes = np.arange(1, 4 ** len(qs), dtype=np.uint64)
    xs = np.zeros(codes.size, dtype=np.uint64)
    zs = np.zeros(codes.size, dtype=np.uint64)
    for j, q in enumerate(qs):
        letter = (codes >> np.uint64(2 * j)) & np.uint64(3)  # 1=X 2=Y 3=Z
        bit = np.uint64(1 << (n_qubits - 1 - q))
        xs |= np.where((letter == 1) | (letter == 2), bit, np.uint64(0))
        zs |= np.where(letter >= 2, bit, np.uint64(0))
    order = np.lexsort((zs, xs))
    return xs[order], zs[order]


def _per_term_masks(spec: DomainSpec, h: Hamiltonian, pools: Sequence[Pool] | None):
    if pools is not None:
        for pool in pools:
            yield pool.xs, pool.zs
        return
    if spec.method == "LA":
        # LA pools can be far too large to hold as string objects
        for m in range(h.n_terms):
            own = term_support(h, m)
            neigh = interaction_set(h, m)
            bare = spec.D is not None and spec.D == len(own) and neigh
            yield _strings_on_masks(h.n_qubits, sorted(own if bare else own | neigh))
        return
    for pool in build_pools(spec, h):
        yield pool.xs, pool.zs


@dataclass(frozen=True)
class StepResources:
    n_bit: int
    method: str
    D: int
    gate_count: int
    depth: int
    n_rotations: int
    linear_system_size: int
    bound_size: int
    bound_ops_per_qubit: Fraction

    def row(self) -> list:
        return [
            self.n_bit, self.method, self.D, self.gate_count, self.depth, self.bound_size,
            self.n_rotations, self.linear_system_size, float(self.bound_ops_per_qubit),
        ]


RESOURCE_HEADER = (
    "n_bit,method,D,gate_count,depth,table1_bound,n_rotations,linear_system_size,bound_ops_per_qubit"
)


def step_resources(h: Hamiltonian, spec: DomainSpec, pools: Sequence[Pool] | None = None) -> StepResources:
    """Gate count and depth of one imaginary-time step, with the closed-form sizes.

    Per-term methods apply every term's pool in term order. Shared-pool
    methods merge the terms over the common basis, so one step is a single
    pass over the shared pool.
    """
    n = h.n_qubits
    D = nominal_domain(spec, h)
    frontier = np.zeros(n, dtype=np.int64)
    gates = n_rot = largest = 0
    if spec.per_term:
        sources = _per_term_masks(spec, h, pools)
    else:
        shared = pools[0] if pools else build_pools(spec, h)[0]
        sources = iter([(shared.xs, shared.zs)])
    for xs, zs in sources:
        g, _ = kernels.rotation_schedule(np.ascontiguousarray(xs), np.ascontiguousarray(zs), n, frontier)
        gates += g
        n_rot += len(xs)
        largest = max(largest, len(xs))
    size, ops = pool_size_scaling(spec, n, h.n_terms, D)
    return StepResources(n, spec.label, D, int(gates), int(frontier.max(initial=0)), n_rot, largest, size, ops)


def write_resources(rows: Iterable[StepResources], path) -> None:
    lines = [RESOURCE_HEADER]
    lines += [",".join(str(v) for v in r.row()) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")
