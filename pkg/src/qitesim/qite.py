"""Quantum imaginary-time evolution driver.

Each partial Hamiltonian ``h[m]`` is replaced, step by step, by the unitary
``exp(-i dtau A)`` with ``A = sum_I a_I sigma_I`` over a pool of Pauli
strings. The real coefficients solve ``(S + delta) a = b`` with

    S_IJ = Re <psi| sigma_I sigma_J |psi>
    b_I  = Im <psi| sigma_I h[m] |psi>

which is the first-order least-squares fit of ``exp(-i dtau A)|psi>`` to the
normalized ``exp(-dtau h[m])|psi>``. The unitary is applied as an ordered
product of single-string rotations in the pool's canonical order.

Two exact reductions keep the systems small. When the state and every
Hamiltonian term are real, strings with an even number of Y letters decouple
from the rest and have ``b = 0``. When a Pauli string commutes with every
term and stabilizes the state (the global spin flip for max-cut), strings
anticommuting with it decouple likewise, and inner products can be summed
over half of the basis. Screened coefficients are exactly zero in the
ridge solution, so results match the unscreened solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import blas, lapack

from . import kernels
from .hamiltonian import Hamiltonian, Spectrum, brute_force_spectrum, spectral_decomposition
from .pauli import DimensionError, PauliString
from .pools import DomainSpec, Pool, build_pools, validate
from .statevec import StateVector, uniform_init

log = logging.getLogger(__name__)

DEFAULT_RIDGE = 1e-8
EXACT_EXP_MAX_QUBITS = 10


class SolverError(ArithmeticError):
    pass


class UnsupportedMethodError(ValueError):
    pass


@dataclass
class StepSolve:
    """Coefficients and diagnostics for one partial Hamiltonian at one step.

    ``a`` is ``None`` when the run was asked not to keep coefficients.
    """

    m: int
    pool: Pool = field(repr=False)
    a: np.ndarray | None
    residual: float
    gram_cond: float
    norm_c: float
    n_active: int


@dataclass
class StepRecord:
    step: int
    tau: float
    energy: float
    r: float
    n_of_E: list[tuple[float, float]]
    solves: list[StepSolve] = field(default_factory=list, repr=False)


@dataclass
class CompressionBlock:
    """Steps ``start_step..end_step`` merged into one exponential of ``a_sum``."""

    start_step: int
    end_step: int
    a_sum: np.ndarray = field(repr=False)

    @property
    def n_comp(self) -> int:
        return self.end_step - self.start_step + 1


@dataclass
class Trajectory:
    hamiltonian: Hamiltonian = field(repr=False)
    spec: DomainSpec
    dtau: float
    ground_energy: float
    pools: list[Pool] = field(repr=False)
    steps: list[StepRecord] = field(default_factory=list, repr=False)
    blocks: list[CompressionBlock] = field(default_factory=list)
    compressed: bool = False
    final_state: StateVector | None = field(default=None, repr=False)
    program: list[tuple[np.ndarray, np.ndarray, np.ndarray]] | None = field(default=None, repr=False)

    @property
    def final_energy(self) -> float:
        return self.steps[-1].energy

    @property
    def final_r(self) -> float:
        return self.steps[-1].r

    @property
    def taus(self) -> np.ndarray:
        return np.array([s.tau for s in self.steps])

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.steps])

    @property
    def n_steps(self) -> int:
        return len(self.steps) - 1

    def rotation_program(self) -> list[tuple[PauliString, float]]:
        """Every applied rotation ``(string, angle)`` in order.

        Compressed runs yield one pass over the shared pool per block;
        uncompressed runs need ``record_program=True``.
        """
        n = self.hamiltonian.n_qubits
        if self.compressed:
            pool = self.pools[0]
            out = []
            for blk in self.blocks:
                out += [(p, self.dtau * a) for p, a in zip(pool.strings, blk.a_sum) if a != 0.0]
            return out
        if self.program is None:
            raise ValueError("run was not recorded; pass record_program=True")
        return [
            (PauliString(n, int(x), int(z)), float(t))
            for xs, zs, ts in self.program
            for x, z, t in zip(xs, zs, ts)
        ]


def figure_of_merit(energy: float, ground_energy: float) -> float:
    """``energy / ground_energy``; defined for negative ground energies only."""
    if not ground_energy < 0:
        raise ValueError(f"figure of merit needs a negative ground energy, got {ground_energy}")
    return energy / ground_energy


def _ridge_solve(mat: np.ndarray, rhs: np.ndarray, delta: float) -> tuple[np.ndarray, float]:
    """Solve ``(mat + delta I) x = rhs`` for symmetric ``mat``.

    Only the upper triangle of ``mat`` is read. Cholesky first, least
    squares as fallback.
    """
    reg = np.array(mat, dtype=float, order="F")
    reg[np.diag_indices_from(reg)] += delta
    c, info = lapack.dpotrf(reg, lower=0, clean=0, overwrite_a=0)
    if info == 0:
        x, info = lapack.dpotrs(c, rhs, lower=0)
        d = np.abs(np.diag(c))
        cond = float((d.max() / d.min()) ** 2) if d.min() > 0 else float("inf")
    else:
        full = np.triu(reg) + np.triu(reg, 1).T
        try:
            x, _, _, sv = sla.lstsq(full, rhs, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SolverError(f"linear solve failed: {exc}") from exc
        cond = float(sv[0] / sv[-1]) if len(sv) and sv[-1] > 0 else float("inf")
    if not np.all(np.isfinite(x)):
        raise SolverError("linear solve produced non-finite coefficients")
    return x, cond


def _gram(M: np.ndarray, *, rows: bool, weight: float) -> np.ndarray:
    """Upper triangle of ``weight * M M^T`` (``rows=True``) or ``weight * M^T M``."""
    # M is C-contiguous, so M.T is Fortran-ordered and dsyrk reads it without a copy
    return blas.dsyrk(weight, M.T, trans=1 if rows else 0)


def solve_step(S_re: np.ndarray, b: np.ndarray, delta: float = DEFAULT_RIDGE) -> np.ndarray:
    """Ridge-regularized solution of ``S_re a = b``."""
    S_re = np.asarray(S_re, dtype=float)
    b = np.asarray(b, dtype=float)
    if S_re.ndim != 2 or S_re.shape[0] != S_re.shape[1] or b.shape != (S_re.shape[0],):
        raise DimensionError("S must be square and match b")
    if delta < 0:
        raise ValueError("ridge parameter must be non-negative")
    scale = max(1.0, float(np.abs(S_re).max(initial=0.0)))
    if not np.allclose(S_re, S_re.T, rtol=0, atol=1e-10 * scale):
        raise ValueError("S is not symmetric")
    if S_re.shape[0] == 0:
        return np.zeros(0)
    return _ridge_solve(S_re, b, delta)[0]


def assemble_system(s: StateVector, pool: Pool, term: tuple[float, PauliString], dtau: float | None = None):
    """Full ``(S_re, b, c)`` for one term, without any screening.

    ``c = <psi|exp(-2 dtau h)|psi>`` for the term without the constant
    offset; it is ``None`` when ``dtau`` is not given.
    """
    coeff, p = term
    if p.n_qubits != s.n_qubits or (len(pool) and pool.strings[0].n_qubits != s.n_qubits):
        raise DimensionError("state, pool and term sizes differ")
    if len(pool) == 0:
        raise ValueError("empty pool")
    cols = kernels.pauli_columns(s.amplitudes, pool.xs, pool.zs)
    g = coeff * _apply_string(s.amplitudes, p)
    S = (cols.conj().T @ cols).real
    S = 0.5 * (S + S.T)
    b = (cols.conj().T @ g).imag
    c = None
    if dtau is not None:
        c = float(np.dot(s.probabilities(), np.exp(-2 * dtau * _term_diag(s.n_qubits, coeff, p))))
    return S, b, c


def _apply_string(psi: np.ndarray, p: PauliString) -> np.ndarray:
    xs = np.array([p.x_mask], dtype=np.uint64)
    zs = np.array([p.z_mask], dtype=np.uint64)
    return kernels.pauli_columns(psi, xs, zs)[:, 0]


def _term_diag(n: int, coeff: float, p: PauliString) -> np.ndarray:
    if not p.is_diagonal():
        raise ValueError("only diagonal partial Hamiltonians are supported")
    idx = np.arange(1 << n, dtype=np.uint64)
    return coeff * (1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(p.z_mask)) & 1))


def global_flip(n_qubits: int) -> PauliString:
    full = (1 << n_qubits) - 1
    return PauliString(n_qubits, full, 0)


def _popcount_parity(v: np.ndarray) -> np.ndarray:
    return np.bitwise_count(v) & 1


class Evolver:
    """Precomputed pools and term data for repeated QITE steps on one Hamiltonian.

    Parameters
    ----------
    h, spec
        Hamiltonian and pool recipe; the recipe is validated up front.
    delta
        Ridge parameter added to ``S``.
    screen
        Use the exact real-state and stabilizer reductions.
    stabilizers
        Candidate symmetry strings; ``None`` means the global spin flip.
    exact_exponential
        Apply ``exp(-i dtau A)`` as a dense exponential instead of a product
        of rotations (cross-check mode, at most 10 qubits).
    reuse_gram
        For shared pools, factor ``S`` once per step instead of per term.
        All terms of the step are then solved against the state at the start
        of the step and applied in sequence (a first-order approximation of
        the per-term update).
    """

    def __init__(
        self,
        h: Hamiltonian,
        spec: DomainSpec,
        *,
        delta: float = DEFAULT_RIDGE,
        screen: bool = True,
        stabilizers: list[PauliString] | None = None,
        exact_exponential: bool = False,
        reuse_gram: bool = False,
    ):
        if not h.is_diagonal():
            raise ValueError("only diagonal Hamiltonians are supported")
        if delta < 0:
            raise ValueError("ridge parameter must be non-negative")
        validate(spec, h)
        if exact_exponential and h.n_qubits > EXACT_EXP_MAX_QUBITS:
            raise ValueError(f"dense exponential mode is limited to {EXACT_EXP_MAX_QUBITS} qubits")
        self.h = h
        self.spec = spec
        self.delta = delta
        self.screen = screen
        self.exact_exponential = exact_exponential
        self.reuse_gram = reuse_gram and not spec.per_term
        self.pools = build_pools(spec, h)
        n = h.n_qubits
        self.term_diags = [_term_diag(n, c, p) for c, p in h.terms]
        self.h_real = all(p.n_y % 2 == 0 for _, p in h.terms)
        cands = [global_flip(n)] if stabilizers is None else list(stabilizers)
        self.stabilizers = [q for q in cands if all(q.commutes_with(p) for _, p in h.terms)]
        self._odd_y = {}
        self._stab_comm = {}
        for pool in {id(p): p for p in self.pools}.values():
            self._odd_y[id(pool)] = _popcount_parity(pool.xs & pool.zs).astype(bool)
            self._stab_comm[id(pool)] = [
                _popcount_parity((pool.xs & np.uint64(q.z_mask)) ^ (pool.zs & np.uint64(q.x_mask))) == 0
                for q in self.stabilizers
            ]

    @property
    def shared_pool(self) -> bool:
        return not self.spec.per_term

    # -- screening -------------------------------------------------------

    def _screen(self, psi: np.ndarray, pool: Pool):
        """Active-string mask, basis rows to sum over, row weight, real flag."""
        n_pool = len(pool)
        active = np.ones(n_pool, dtype=bool)
        rows, weight = None, 1.0
        real = False
        if not self.screen:
            return active, rows, weight, real
        if self.h_real and not np.any(psi.imag):
            real = True
            active &= self._odd_y[id(pool)]
        for q, commuting in zip(self.stabilizers, self._stab_comm[id(pool)]):
            q_psi = _apply_string(psi, q)
            if np.array_equal(q_psi, psi) or np.array_equal(q_psi, -psi):
                active &= commuting
                pivot = 1 << (q.x_mask.bit_length() - 1)
                idx = np.arange(psi.size)
                rows = idx[(idx & pivot) == 0]
                weight = 2.0
                break
        return active, rows, weight, real

    # -- one term --------------------------------------------------------

    def _reduced_columns(self, psi, pool, active, rows, real):
        if real:
            # odd-Y strings map a real state to i * (real vector)
            return kernels.pauli_columns_real(psi.real, pool.xs[active], pool.zs[active], rows)
        cols = kernels.pauli_columns(psi, pool.xs[active], pool.zs[active], rows)
        return np.vstack([cols.imag, -cols.real])

    def _target(self, psi, m, rows, real):
        coeff, p = self.h.terms[m]
        g = coeff * _apply_string(psi, p)
        if rows is not None:
            g = g[rows]
        if real:
            return -g.real
        return -np.concatenate([g.real, g.imag])

    def solve_term(self, psi: np.ndarray, m: int, gram=None) -> tuple[np.ndarray, float, int]:
        """Coefficient vector over the term's full pool, conditioning, active count."""
        pool = self.pools[m]
        a = np.zeros(len(pool))
        if gram is not None:
            # every term is solved against the state the factor was built from
            active, rows, weight, real, M, factor, psi = gram
        else:
            active, rows, weight, real = self._screen(psi, pool)
        n_act = int(active.sum())
        if n_act == 0:
            return a, 1.0, 0
        if gram is None:
            M = self._reduced_columns(psi, pool, active, rows, real)
        t = self._target(psi, m, rows, real)
        if gram is not None:
            x, _ = lapack.dpotrs(factor[0], weight * (M.T @ t), lower=0)
            d = np.abs(np.diag(factor[0]))
            cond = float((d.max() / d.min()) ** 2)
        elif M.shape[0] < n_act:
            # dual form: a = w M^T (w M M^T + delta)^-1 t
            y, cond = _ridge_solve(_gram(M, rows=True, weight=weight), t, self.delta)
            x = weight * (M.T @ y)
        else:
            x, cond = _ridge_solve(_gram(M, rows=False, weight=weight), weight * (M.T @ t), self.delta)
        if not np.all(np.isfinite(x)):
            raise SolverError("non-finite coefficients")
        a[active] = x
        return a, cond, n_act

    def _step_gram(self, psi: np.ndarray):
        pool = self.pools[0]
        active, rows, weight, real = self._screen(psi, pool)
        if not active.any():
            return None
        M = self._reduced_columns(psi, pool, active, rows, real)
        reg = np.asfortranarray(_gram(M, rows=False, weight=weight))
        reg[np.diag_indices_from(reg)] += self.delta
        c, info = lapack.dpotrf(reg, lower=0, clean=1)
        if info != 0:
            raise SolverError(f"Gram factorization failed (info={info})")
        return active, rows, weight, real, M, (c, False), psi.copy()

    # -- applying generators ----------------------------------------------

    def apply_generator(self, state: StateVector, pool: Pool, thetas: np.ndarray) -> None:
        """In place ``state <- exp(-i sum_I thetas_I sigma_I) state`` (product form unless exact)."""
        if self.exact_exponential:
            _apply_dense_exponential(state, pool, thetas)
        else:
            nz = thetas != 0.0
            xs, zs, ts = pool.xs[nz], pool.zs[nz], np.ascontiguousarray(thetas[nz])
            psi = state.amplitudes
            if self.screen and not np.any(psi.imag) and np.all(_popcount_parity(xs & zs)):
                kernels.apply_rotations_real(psi.real, xs, zs, ts)
            else:
                kernels.apply_rotations(psi, xs, zs, ts)
        state.renormalize()

    def step(self, state: StateVector, dtau: float, *, keep_coefficients: bool = True, program=None):
        """One Trotter sweep over all terms; returns the new state, solves, summed coefficients."""
        if not dtau > 0:
            raise ValueError("dtau must be positive")
        if state.n_qubits != self.h.n_qubits:
            raise DimensionError("state and Hamiltonian sizes differ")
        s = state.copy()
        solves = []
        a_total = np.zeros(len(self.pools[0])) if self.shared_pool else None
        gram = self._step_gram(s.amplitudes) if self.reuse_gram else None
        for m in range(self.h.n_terms):
            pool = self.pools[m]
            psi = s.amplitudes
            probs = np.abs(psi) ** 2
            decay = np.exp(-dtau * self.term_diags[m])
            c = float(np.dot(probs, decay**2))
            target = psi * decay / np.sqrt(c)
            if gram is None and self.reuse_gram:
                a, cond, n_act = np.zeros(len(pool)), 1.0, 0
            else:
                a, cond, n_act = self.solve_term(psi, m, gram)
            thetas = dtau * a
            self.apply_generator(s, pool, thetas)
            if program is not None:
                nz = thetas != 0.0
                program.append((pool.xs[nz].copy(), pool.zs[nz].copy(), thetas[nz]))
            residual = float(np.linalg.norm(target - s.amplitudes) ** 2)
            if a_total is not None:
                a_total += a
            solves.append(StepSolve(m, pool, a if keep_coefficients else None, residual, cond, c, n_act))
        return s, solves, a_total


def _apply_dense_exponential(state: StateVector, pool: Pool, thetas: np.ndarray) -> None:
    """``exp(-i G) psi`` with ``G = sum_I thetas_I sigma_I``, by scaled Taylor series.

    The series is summed to machine precision on sub-steps of ``G / s`` where
    ``s`` bounds the operator norm of each sub-step by one.
    """
    nz = np.flatnonzero(thetas)
    if nz.size == 0:
        return
    xs, zs = pool.xs[nz], pool.zs[nz]
    th = np.ascontiguousarray(thetas[nz], dtype=float)
    n_sub = max(1, int(np.ceil(np.abs(th).sum())))
    th = th / n_sub
    psi = state.amplitudes
    for _ in range(n_sub):
        term = psi.copy()
        out = psi.copy()
        for k in range(1, 60):
            term = (-1j / k) * kernels.apply_pauli_sum(term, xs, zs, th)
            out += term
            if np.linalg.norm(term) < 1e-17:
                break
        psi = out
    state.amplitudes[:] = psi


def qite_step(
    s: StateVector,
    h: Hamiltonian,
    spec: DomainSpec,
    dtau: float,
    delta: float = DEFAULT_RIDGE,
    **kwargs,
) -> tuple[StateVector, list[StepSolve]]:
    """One imaginary-time step from ``s``; see :class:`Evolver` for options."""
    ev = Evolver(h, spec, delta=delta, **kwargs)
    new, solves, _ = ev.step(s, dtau)
    return new, solves


def _record(step, tau, state, h, spectrum, solves) -> StepRecord:
    e = h.energy(state)
    r = figure_of_merit(e, spectrum.ground_energy) if spectrum.ground_energy < 0 else float("nan")
    return StepRecord(step, tau, e, r, spectral_decomposition(state, spectrum), solves)


def run(
    h: Hamiltonian,
    spec: DomainSpec,
    dtau: float,
    n_steps: int,
    delta: float = DEFAULT_RIDGE,
    compress: bool = False,
    *,
    spectrum: Spectrum | None = None,
    keep_coefficients: bool = True,
    record_program: bool = False,
    early_stop_tol: float | None = None,
    early_stop_window: int = 50,
    initial_state: StateVector | None = None,
    evolver: Evolver | None = None,
    **kwargs,
) -> Trajectory:
    """Evolve the uniform superposition for ``n_steps`` steps of size ``dtau``.

    With ``early_stop_tol`` set, the run ends once ``|dE|`` stays below it for
    ``early_stop_window`` consecutive steps.
    """
    if compress:
        return compress_run(
            h, spec, dtau, n_steps, delta, spectrum=spectrum, keep_coefficients=keep_coefficients,
            early_stop_tol=early_stop_tol, early_stop_window=early_stop_window,
            initial_state=initial_state, evolver=evolver, **kwargs,
        )
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    if not dtau > 0:
        raise ValueError("dtau must be positive")
    ev = evolver or Evolver(h, spec, delta=delta, **kwargs)
    spectrum = spectrum or brute_force_spectrum(h)
    state = initial_state.copy() if initial_state is not None else uniform_init(h.n_qubits)
    program = [] if record_program else None
    traj = Trajectory(h, spec, dtau, spectrum.ground_energy, ev.pools, program=program)
    traj.steps.append(_record(0, 0.0, state, h, spectrum, []))
    quiet = 0
    for n in range(1, n_steps + 1):
        state, solves, _ = ev.step(state, dtau, keep_coefficients=keep_coefficients, program=program)
        rec = _record(n, n * dtau, state, h, spectrum, solves)
        quiet = quiet + 1 if early_stop_tol is not None and abs(rec.energy - traj.steps[-1].energy) < early_stop_tol else 0
        traj.steps.append(rec)
        if early_stop_tol is not None and quiet >= early_stop_window:
            log.info("converged at step %d", n)
            break
    traj.final_state = state
    return traj


def compress_run(
    h: Hamiltonian,
    spec: DomainSpec,
    dtau: float,
    n_steps: int,
    delta: float = DEFAULT_RIDGE,
    *,
    spectrum: Spectrum | None = None,
    keep_coefficients: bool = True,
    early_stop_tol: float | None = None,
    early_stop_window: int = 50,
    initial_state: StateVector | None = None,
    evolver: Evolver | None = None,
    **kwargs,
) -> Trajectory:
    """QITE with merged imaginary-time steps.

    Each step's coefficient vectors (summed over terms) are added to the open
    block, and the working state is re-prepared as the closed blocks followed
    by the single exponential of the open block's sum. When the re-prepared
    energy rises above the previous step's, the block is closed at the
    previous step and a new one starts with the current step.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    if not dtau > 0:
        raise ValueError("dtau must be positive")
    ev = evolver or Evolver(h, spec, delta=delta, **kwargs)
    if not ev.shared_pool:
        raise UnsupportedMethodError(f"compression needs a shared pool; {spec.label} builds one pool per term")
    spectrum = spectrum or brute_force_spectrum(h)
    pool = ev.pools[0]
    prefix = initial_state.copy() if initial_state is not None else uniform_init(h.n_qubits)
    working = prefix.copy()
    traj = Trajectory(h, spec, dtau, spectrum.ground_energy, ev.pools, compressed=True)
    traj.steps.append(_record(0, 0.0, working, h, spectrum, []))
    prev_e = traj.steps[0].energy
    open_sum = np.zeros(len(pool))
    open_start = 1
    quiet = 0
    n_done = 0
    for n in range(1, n_steps + 1):
        _, solves, step_vec = ev.step(working, dtau, keep_coefficients=keep_coefficients)
        candidate = open_sum + step_vec
        cand_state = prefix.copy()
        ev.apply_generator(cand_state, pool, dtau * candidate)
        e = h.energy(cand_state)
        if e > prev_e and n > open_start:
            traj.blocks.append(CompressionBlock(open_start, n - 1, open_sum))
            prefix = working
            open_start = n
            candidate = step_vec.copy()
            cand_state = prefix.copy()
            ev.apply_generator(cand_state, pool, dtau * candidate)
        open_sum = candidate
        working = cand_state
        rec = _record(n, n * dtau, working, h, spectrum, solves)
        quiet = quiet + 1 if early_stop_tol is not None and abs(rec.energy - prev_e) < early_stop_tol else 0
        prev_e = rec.energy
        traj.steps.append(rec)
        n_done = n
        if early_stop_tol is not None and quiet >= early_stop_window:
            break
    if n_done >= open_start:
        traj.blocks.append(CompressionBlock(open_start, n_done, open_sum))
    traj.final_state = working
    return traj
