"""Pauli string algebra against dense matrix oracles."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qitesim.pauli import (
    DimensionError,
    PauliString,
    PhasedPauli,
    multiply,
    strings_on,
    strings_up_to_weight,
    support,
    to_matrix,
    weight,
)


def pauli_strings(n_min=1, n_max=4):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1), st.integers(0, 2**n - 1))
    ).map(lambda t: PauliString(*t))


def same_size_pair(n_max=4, count=2):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(
            *[st.tuples(st.integers(0, 2**n - 1), st.integers(0, 2**n - 1)) for _ in range(count)]
        ).map(lambda ms: [PauliString(n, x, z) for x, z in ms])
    )


class TestConstruction:
    def test_label_roundtrip(self):
        for label in ["I", "XIZY", "YYYY", "ZIIX"]:
            assert PauliString.from_label(label).label == label

    def test_lowercase_accepted(self):
        assert PauliString.from_label("xz") == PauliString.from_label("XZ")

    @pytest.mark.parametrize("bad", ["XA", "", "X Z", "1"])
    def test_parser_rejects(self, bad):
        with pytest.raises(ValueError):
            PauliString.from_label(bad)

    def test_masks_are_big_endian(self):
        # qubit 0 is the leftmost letter and the most significant bit
        p = PauliString.from_label("XIZ")
        assert (p.x_mask, p.z_mask) == (0b100, 0b001)

    def test_letters_from_bits(self):
        p = PauliString.from_label("IXYZ")
        assert [p.letter(q) for q in range(4)] == ["I", "X", "Y", "Z"]

    def test_mask_outside_register(self):
        with pytest.raises(ValueError):
            PauliString(2, 0b100, 0)

    def test_from_letters(self):
        assert PauliString.from_letters(3, {0: "Y", 2: "Z"}).label == "YIZ"

    def test_equality_is_mask_equality(self):
        assert PauliString(3, 5, 1) == PauliString.from_label("XIY")
        assert PauliString(3, 5, 1) != PauliString(3, 5, 4)


class TestMultiply:
    def test_xz_is_minus_i_y(self):
        r = multiply(PauliString.from_label("XI"), PauliString.from_label("ZI"))
        assert r.phase == -1j and r.string.label == "YI"

    def test_involution(self):
        r = multiply(PauliString.from_label("XZ"), PauliString.from_label("XZ"))
        assert r.phase == 1 and r.string.is_identity()

    def test_yy_times_zi(self):
        r = multiply(PauliString.from_label("YY"), PauliString.from_label("ZI"))
        assert r.phase == 1j and r.string.label == "XY"
        np.testing.assert_allclose(to_matrix(r), to_matrix(PauliString.from_label("YY")) @ to_matrix(PauliString.from_label("ZI")))

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            multiply(PauliString.from_label("X"), PauliString.from_label("XX"))

    @given(same_size_pair())
    def test_matches_dense_product(self, pair):
        a, b = pair
        np.testing.assert_allclose(to_matrix(multiply(a, b)), to_matrix(a) @ to_matrix(b), atol=1e-12)

    @given(same_size_pair(count=3))
    def test_associative_with_phase(self, triple):
        a, b, c = triple
        left = PhasedPauli.of(a) * b * c
        right = PhasedPauli.of(a) * (PhasedPauli.of(b) * c)
        assert left == right
        np.testing.assert_allclose(to_matrix(left), to_matrix(a) @ to_matrix(b) @ to_matrix(c), atol=1e-12)

    @given(same_size_pair())
    def test_commute_or_anticommute(self, pair):
        a, b = pair
        ab, ba = multiply(a, b), multiply(b, a)
        assert ab.string == ba.string
        ratio = ab.phase / ba.phase
        assert ratio in (1, -1)
        assert (ratio == 1) == a.commutes_with(b)

    @given(same_size_pair())
    def test_weight_subadditive(self, pair):
        a, b = pair
        assert weight(multiply(a, b).string) <= weight(a) + weight(b)

    @given(pauli_strings())
    def test_self_product_is_identity(self, p):
        r = multiply(p, p)
        assert r.power == 0 and r.string.is_identity()


class TestSupport:
    @pytest.mark.parametrize(
        "label, expected",
        [("III", set()), ("ZIZ", {0, 2}), ("XYZ", {0, 1, 2})],
    )
    def test_examples(self, label, expected):
        p = PauliString.from_label(label)
        assert support(p) == expected
        assert weight(p) == len(expected)

    @given(pauli_strings())
    def test_weight_is_support_size(self, p):
        assert p.weight == len(p.support())

    @given(pauli_strings())
    def test_hermitian_and_involutive(self, p):
        m = to_matrix(p)
        np.testing.assert_allclose(m, m.conj().T, atol=1e-12)
        np.testing.assert_allclose(m @ m, np.eye(len(m)), atol=1e-12)


class TestEnumeration:
    def test_strings_on_counts(self):
        assert len(list(strings_on(5, [1, 3]))) == 15
        assert len(list(strings_on(5, [1, 3], exact=True))) == 9

    def test_never_identity(self):
        assert all(not p.is_identity() for p in strings_on(3, [0, 1, 2]))

    @pytest.mark.parametrize("n, D", [(4, 1), (4, 2), (5, 3), (3, 3)])
    def test_up_to_weight_count(self, n, D):
        from math import comb

        got = list(strings_up_to_weight(n, D))
        assert len(got) == len(set(got)) == sum(comb(n, w) * 3**w for w in range(1, D + 1))
        assert max(p.weight for p in got) == D

    def test_sorting_is_canonical(self):
        ps = [PauliString.from_label(s) for s in ["ZI", "XI", "IX", "YZ"]]
        assert sorted(ps) == sorted(ps, key=lambda p: (p.n_qubits, p.x_mask, p.z_mask))
