"""Acceptance gate: one group of tests per criterion.

The terminal summary prints one PASS/FAIL line per criterion (see conftest).
Trajectories are shared through the session ``runs`` cache.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qitesim import qite
from qitesim.circuit import Circuit, Gate, compile_rotation, depth, trajectory_circuits
from qitesim.hamiltonian import (
    brute_force_spectrum,
    complete_graph,
    generate_graph,
    maxcut_hamiltonian,
    petersen,
    spectral_decomposition,
)
from qitesim.noise import NoiseModel, kraus_completeness, relaxation_kraus, replay
from qitesim.pauli import PauliString, to_matrix
from qitesim.pools import DomainSpec, build_pool, build_pools, interaction_set, nominal_domain
from qitesim.statevec import StateVector, exact_ite, uniform_init

C1 = "full-pool QITE matches exact ITE on K4"
C2 = "Petersen ground energy is -12"
C3 = "NLA accuracy ordering on Petersen"
C4 = "NLA energy is monotone; LA-D2 on weighted K10 is not"
C5 = "pool sizes equal the closed forms and stay below the table bound"
C6 = "eLA reduces to LA and to NLA-D3"
C7 = "compression keeps accuracy with few blocks"
C8 = "noisy replay ordering on K4"
C9 = "compiled rotations match dense exponentials"
C10 = "numerical hygiene over 1000 randomized cases"

PETERSEN_STEPS = 1000  # tau = 10 at dtau = 0.01


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2


# -- 1 ------------------------------------------------------------------------


@pytest.mark.criterion(1, C1)
def test_c1_full_pool_tracks_exact_ite(k4_h):
    spec = DomainSpec("NLA", 4)
    ev = qite.Evolver(k4_h, spec)
    assert len(ev.pools[0]) == 4**4 - 1
    diag = k4_h.diagonal()
    dtau, n_steps = 0.01, 500
    s = uniform_init(4)
    worst = 0.0
    for _ in range(n_steps):
        ref = exact_ite(s, diag, dtau)
        s, _, _ = ev.step(s, dtau, keep_coefficients=False)
        worst = max(worst, 1 - fidelity(ref, s))
    assert worst <= 1e-4
    e_exact = k4_h.energy(exact_ite(uniform_init(4), diag, dtau * n_steps))
    assert abs(k4_h.energy(s) - e_exact) <= 1e-3


# -- 2 ------------------------------------------------------------------------


@pytest.mark.criterion(2, C2)
def test_c2_petersen_ground_energy(petersen_h):
    assert brute_force_spectrum(petersen_h).ground_energy == -12.0


# -- 3 ------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.criterion(3, C3)
def test_c3_accuracy_ordering(petersen_h, runs):
    r = {
        label: runs.get(petersen_h, method, D, 0.01, PETERSEN_STEPS).final_r
        for label, method, D in [
            ("NLA-D3", "NLA", 3),
            ("NLA-D2.5", "NLA25", None),
            ("NLA-D2", "NLA", 2),
            ("eLA-D3", "eLA", 3),
        ]
    }
    print("final r:", {k: round(v, 4) for k, v in r.items()})
    assert r["NLA-D3"] >= r["NLA-D2.5"] >= r["NLA-D2"]
    assert r["NLA-D2"] >= r["eLA-D3"] - 0.03
    assert r["NLA-D3"] >= 0.99
    assert r["NLA-D2"] >= 0.93


# -- 4 ------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.criterion(4, C4)
@pytest.mark.parametrize("D", [2, 3])
@pytest.mark.parametrize("graph", ["k4", "petersen"])
def test_c4_nla_monotone(graph, D, runs, k4_h, petersen_h):
    h, dtau, n = (k4_h, 0.01, 500) if graph == "k4" else (petersen_h, 0.01, PETERSEN_STEPS)
    e = runs.get(h, "NLA", D, dtau, n).energies
    rise = np.diff(e).max()
    print(f"{graph} NLA-D{D}: largest per-step rise {rise:.3e}")
    assert rise <= 1e-9


@pytest.mark.criterion(4, C4)
def test_c4_la_not_monotone_on_weighted_k10(runs):
    h = maxcut_hamiltonian(generate_graph("complete_weighted", 10, seed=0))
    e = runs.get(h, "LA", 2, 0.01, PETERSEN_STEPS).energies
    assert np.diff(e).max() > 0


# -- 5 ------------------------------------------------------------------------


@pytest.mark.criterion(5, C5)
def test_c5_pool_counts(petersen_h):
    assert len(build_pool(DomainSpec("NLA", 2), petersen_h)) == 435
    h = maxcut_hamiltonian(generate_graph("random_3_regular", 20, seed=1))
    # 3-regular girth check: the family must be triangle-free for the 207 count
    tri_free = all(len(interaction_set(h, m)) == 4 for m in range(h.n_terms))
    pet_ela = {len(p) for p in build_pools(DomainSpec("eLA", 3), petersen_h)}
    assert pet_ela == {207}
    if tri_free:
        assert {len(p) for p in build_pools(DomainSpec("eLA", 3), h)} == {207}
    for p in build_pools(DomainSpec("LA", 6), petersen_h):
        assert len(p) == 4**6 - 1
    for n in range(4, 8):
        k = maxcut_hamiltonian(complete_graph(n))
        assert {len(p) for p in build_pools(DomainSpec("LA"), k)} == {4**n - 1}


@pytest.mark.criterion(5, C5)
@pytest.mark.parametrize(
    "method, D", [("NLA", 1), ("NLA", 2), ("NLA", 3), ("NLA25", None), ("eLA", 2), ("eLA", 3), ("LA", 6)]
)
def test_c5_table_bound(petersen_h, method, D):
    spec = DomainSpec(method, D)
    Dn = nominal_domain(spec, petersen_h)
    bound = 4**Dn * math.comb(10, Dn)
    assert all(len(p) <= bound for p in build_pools(spec, petersen_h))


# -- 6 ------------------------------------------------------------------------


@pytest.mark.criterion(6, C6)
@pytest.mark.parametrize("graph", ["petersen", "k5", "k6"])
def test_c6_ela_full_domain_is_la(graph):
    g = petersen() if graph == "petersen" else complete_graph(int(graph[1:]))
    h = maxcut_hamiltonian(g)
    D = 2 + len(interaction_set(h, 0))
    for m in range(h.n_terms):
        assert build_pool(DomainSpec("eLA", D), h, m).as_set() == build_pool(DomainSpec("LA"), h, m).as_set()


@pytest.mark.criterion(6, C6)
@pytest.mark.parametrize("n", [4, 5, 6, 8])
def test_c6_ela_union_is_nla_on_complete(n):
    h = maxcut_hamiltonian(complete_graph(n))
    union = frozenset().union(*(p.as_set() for p in build_pools(DomainSpec("eLA", 3), h)))
    assert union == build_pool(DomainSpec("NLA", 3), h).as_set()


# -- 7 ------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.criterion(7, C7)
def test_c7_compression_accuracy(petersen_h, runs):
    plain = runs.get(petersen_h, "NLA", 2, 0.01, PETERSEN_STEPS)
    comp = runs.get(petersen_h, "NLA", 2, 0.01, PETERSEN_STEPS, compress=True)
    print(f"r uncompressed {plain.final_r:.4f}, compressed {comp.final_r:.4f}, blocks {len(comp.blocks)}")
    assert abs(comp.final_r - plain.final_r) <= 0.03
    assert len(comp.blocks) <= PETERSEN_STEPS / 10


@pytest.mark.criterion(7, C7)
def test_c7_small_step_fidelity(petersen_h):
    spec = DomainSpec("NLA", 2)
    ev = qite.Evolver(petersen_h, spec)
    plain = qite.run(petersen_h, spec, 1e-4, 100, evolver=ev, keep_coefficients=False)
    comp = qite.run(petersen_h, spec, 1e-4, 100, compress=True, evolver=ev, keep_coefficients=False)
    assert fidelity(plain.final_state, comp.final_state) >= 1 - 1e-6


# -- 8 ------------------------------------------------------------------------


K4_NOISE_STEPS = 10  # tau = 5 at dtau = 0.5


@pytest.fixture(scope="module")
def k4_noise_runs(k4_h):
    spec = DomainSpec("NLA", 2)
    plain = qite.run(k4_h, spec, 0.5, K4_NOISE_STEPS, record_program=True, keep_coefficients=False)
    comp = qite.run(k4_h, spec, 0.5, K4_NOISE_STEPS, compress=True, keep_coefficients=False)
    nm = NoiseModel()
    return {
        "plain": replay(trajectory_circuits(plain), k4_h, nm),
        "comp": replay(trajectory_circuits(comp), k4_h, nm),
    }


@pytest.mark.criterion(8, C8)
def test_c8_noiseless_energies(k4_noise_runs):
    (e_plain, _), (e_comp, _) = k4_noise_runs["plain"], k4_noise_runs["comp"]
    assert e_plain <= -3.8
    assert e_comp <= -3.7


@pytest.mark.criterion(8, C8)
def test_c8_noisy_ordering(k4_noise_runs):
    (_, n_plain), (_, n_comp) = k4_noise_runs["plain"], k4_noise_runs["comp"]
    print(f"noisy uncompressed {n_plain:.4f}, noisy compressed {n_comp:.4f}")
    assert n_comp < n_plain
    assert n_plain - n_comp >= 0.2


# -- 9 ------------------------------------------------------------------------


@pytest.mark.criterion(9, C9)
def test_c9_random_rotations():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 6))
        x, z = 0, 0
        while not (x | z):
            x, z = int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n))
        p = PauliString(n, x, z)
        theta = float(rng.uniform(-math.pi, math.pi))
        u = compile_rotation(p, theta).unitary()
        worst = max(worst, np.abs(u - expm(-1j * theta * to_matrix(p))).max())
    assert worst <= 1e-10


@pytest.mark.criterion(9, C9)
def test_c9_depth_of_shared_ladder():
    c = Circuit(2, [Gate("CNOT", (0, 1)), Gate("RZ", (1,), 0.3), Gate("CNOT", (0, 1))])
    assert depth(c) == 3


# -- 10 -----------------------------------------------------------------------

CASES = settings(max_examples=250, derandomize=True)


def _rand_state(seed, n):
    rng = np.random.default_rng(seed)
    return StateVector(rng.normal(size=2**n) + 1j * rng.normal(size=2**n), normalize=True)


@pytest.mark.criterion(10, C10)
@CASES
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 3))
def test_c10_gram_psd(seed, n, D):
    h = maxcut_hamiltonian(generate_graph("complete_weighted", n, seed=seed % 101))
    pool = build_pool(DomainSpec("NLA", min(D, n)), h)
    S, _, _ = qite.assemble_system(_rand_state(seed, n), pool, h.terms[seed % h.n_terms])
    assert np.linalg.eigvalsh(S).min() >= -1e-9


@pytest.mark.criterion(10, C10)
@CASES
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.floats(1e-3, 1.0))
def test_c10_norm_after_step(seed, n, dtau):
    h = maxcut_hamiltonian(generate_graph("complete_weighted", n, seed=seed % 101))
    new, _ = qite.qite_step(_rand_state(seed, n), h, DomainSpec("NLA", 2), dtau)
    assert abs(new.norm() - 1) <= 1e-10


@pytest.mark.criterion(10, C10)
@CASES
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_c10_spectral_weights(seed, n):
    g = generate_graph("complete_weighted", n, seed=seed % 101) if n > 1 else complete_graph(1)
    spec = brute_force_spectrum(maxcut_hamiltonian(g))
    total = sum(w for _, w in spectral_decomposition(_rand_state(seed, n), spec))
    assert abs(total - 1) <= 1e-10


@pytest.mark.criterion(10, C10)
@CASES
@given(st.floats(0, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1.0))
def test_c10_kraus_completeness(t, t1, frac):
    assert kraus_completeness(relaxation_kraus(t, t1, 2 * t1 * frac)) <= 1e-12
