from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qitesim.hamiltonian import complete_graph, generate_graph, maxcut_hamiltonian, petersen
from qitesim.pauli import strings_on
from qitesim.pools import (
    DomainSizeError,
    DomainSpec,
    Pool,
    build_pool,
    build_pools,
    canonical_method,
    interaction_set,
    nla_pool_count,
    nominal_domain,
    pool_size_scaling,
    validate,
)


@pytest.fixture(scope="module")
def pet():
    return maxcut_hamiltonian(petersen())


def test_method_aliases():
    assert canonical_method("nla") == "NLA"
    assert canonical_method("Ela") == "eLA"
    with pytest.raises(ValueError):
        canonical_method("QAOA")
    assert DomainSpec("nla25").label == "NLA-D2.5"
    assert DomainSpec("eLA", 3).label == "eLA-D3"


def test_pool_is_canonical():
    pool = Pool(tuple(strings_on(3, [0, 1])) + tuple(strings_on(3, [1])))
    assert len(pool) == 15
    assert list(pool.strings) == sorted(pool.strings)
    assert [int(x) for x in pool.xs] == [p.x_mask for p in pool]


def test_pool_rejects_identity():
    from qitesim.pauli import PauliString

    with pytest.raises(ValueError):
        Pool((PauliString.from_label("II"),))


def test_interaction_set_petersen(pet):
    # edge (0,1): 0 also meets 4 and 5, 1 also meets 2 and 6
    assert interaction_set(pet, 0) == {2, 4, 5, 6}


class TestCounts:
    def test_nla_d2_petersen(self, pet):
        assert len(build_pool(DomainSpec("NLA", 2), pet)) == 435 == nla_pool_count(10, 2)

    def test_ela_d3_per_edge(self, pet):
        sizes = {len(p) for p in build_pools(DomainSpec("eLA", 3), pet)}
        assert sizes == {207}

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_ela_d3_on_random_regular(self, n):
        h = maxcut_hamiltonian(generate_graph("random_3_regular", n, seed=n))
        for m, p in enumerate(build_pools(DomainSpec("eLA", 3), h)):
            L = len(interaction_set(h, m))
            assert len(p) == 15 + L * 48

    def test_la_full_domain(self, pet):
        for p in build_pools(DomainSpec("LA", 6), pet):
            assert len(p) == 4**6 - 1

    def test_la_on_complete_graph(self):
        h = maxcut_hamiltonian(complete_graph(5))
        assert {len(p) for p in build_pools(DomainSpec("LA"), h)} == {4**5 - 1}

    def test_bounds(self, pet):
        for spec in [DomainSpec("NLA", 2), DomainSpec("NLA", 3), DomainSpec("NLA25")]:
            D = nominal_domain(spec, pet)
            assert len(build_pool(spec, pet)) <= 4**D * comb(10, D)

    def test_nla25_between(self, pet):
        a = build_pool(DomainSpec("NLA", 2), pet).as_set()
        b = build_pool(DomainSpec("NLA25"), pet).as_set()
        c = build_pool(DomainSpec("NLA", 3), pet).as_set()
        assert a < b < c


class TestReductions:
    @pytest.mark.parametrize("graph", [petersen(), complete_graph(5), generate_graph("random_3_regular", 8, seed=2)])
    def test_ela_full_equals_la(self, graph):
        h = maxcut_hamiltonian(graph)
        for m in range(h.n_terms):
            D = 2 + len(interaction_set(h, m))
            if any(2 + len(interaction_set(h, k)) != D for k in range(h.n_terms)):
                pytest.skip("no single eLA domain size is full for every term")
            assert build_pool(DomainSpec("eLA", D), h, m).as_set() == build_pool(DomainSpec("LA"), h, m).as_set()

    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_ela_union_equals_nla_on_complete(self, n):
        h = maxcut_hamiltonian(complete_graph(n))
        union = set().union(*(p.as_set() for p in build_pools(DomainSpec("eLA", 3), h)))
        assert union == build_pool(DomainSpec("NLA", 3), h).as_set()


class TestValidation:
    def test_la_wrong_domain(self, pet):
        with pytest.raises(DomainSizeError, match="domain size invalid for LA"):
            validate(DomainSpec("LA", 4), pet)

    def test_ela_range(self, pet):
        validate(DomainSpec("eLA", 2), pet)
        with pytest.raises(DomainSizeError):
            validate(DomainSpec("eLA", 7), pet)

    def test_nla_range(self, pet):
        with pytest.raises(DomainSizeError):
            validate(DomainSpec("NLA", 11), pet)

    def test_nonpositive(self):
        with pytest.raises(DomainSizeError):
            DomainSpec("NLA", 0)

    def test_per_term_needs_index(self, pet):
        with pytest.raises(ValueError):
            build_pool(DomainSpec("eLA", 3), pet)
        with pytest.raises(ValueError):
            build_pool(DomainSpec("NLA", 2), pet, 0)


@settings(max_examples=30)
@given(st.integers(2, 7), st.integers(1, 4), st.integers(0, 100))
def test_exact_count_below_table_bound(n, D, seed):
    D = min(D, n)
    h = maxcut_hamiltonian(generate_graph("complete_weighted", n, seed=seed))
    size, ops = pool_size_scaling(DomainSpec("NLA", D), n, h.n_terms)
    assert nla_pool_count(n, D) <= size == 4**D * comb(n, D)
    assert ops == 4**D * comb(n - 1, D - 1)
    if n >= 3:
        # a per-term eLA pool unions several domains, so only the shared bound applies
        pools = build_pools(DomainSpec("eLA", 3), h)
        assert all(len(p) <= 4**3 * comb(n, 3) for p in pools)
