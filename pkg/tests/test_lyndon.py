"""Lyndon basis: enumeration, dimension formulas, projection/expansion."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logsigrnn.lyndon import (
    enumerate_lyndon,
    expand_from_basis,
    logsig_dim,
    lyndon_words,
    project_to_basis,
    sig_dim,
    witt_number,
)
from logsigrnn.tensor_algebra import TruncatedTensor, word_index


def is_lyndon_by_rotation(word):
    """A word is Lyndon iff it is strictly smaller than all proper rotations."""
    n = len(word)
    return all(word < word[i:] + word[:i] for i in range(1, n))


class TestEnumeration:
    def test_small_alphabet(self):
        assert lyndon_words(2, 3) == [(1,), (2,), (1, 2), (1, 1, 2), (1, 2, 2)]

    def test_single_letter_alphabet(self):
        assert lyndon_words(1, 3) == [(1,)]

    def test_count_at_degree_two(self):
        words = lyndon_words(3, 2)
        assert len(words) == 6  # 3 letters + (9 - 3) / 2 pairs

    @pytest.mark.parametrize("width", [2, 3])
    @pytest.mark.parametrize("degree", [1, 2, 3, 4])
    def test_matches_rotation_minimality(self, width, degree):
        expected = sorted(
            (
                w
                for n in range(1, degree + 1)
                for w in itertools.product(range(1, width + 1), repeat=n)
                if is_lyndon_by_rotation(w)
            ),
            key=lambda w: (len(w), w),
        )
        assert lyndon_words(width, degree) == expected

    def test_ordering_is_length_then_lex(self):
        words = lyndon_words(3, 4)
        keys = [(len(w), w) for w in words]
        assert keys == sorted(keys)


class TestDimensions:
    def test_degree_one_is_width(self):
        assert logsig_dim(2, 1) == 2

    def test_witt_sums(self):
        assert logsig_dim(2, 3) == 5
        assert logsig_dim(3, 2) == 6

    def test_sig_dim_values(self):
        assert sig_dim(2, 3) == 15
        assert sig_dim(1, 4) == 5
        assert sig_dim(3, 2) == 13

    @pytest.mark.parametrize("width", range(1, 6))
    @pytest.mark.parametrize("degree", range(1, 7))
    def test_dim_equals_enumeration(self, width, degree):
        assert logsig_dim(width, degree) == len(lyndon_words(width, degree))

    @pytest.mark.parametrize("width", range(2, 6))
    def test_logsig_below_signature(self, width):
        gaps = []
        for degree in range(1, 7):
            gap = sig_dim(width, degree) - 1 - logsig_dim(width, degree)
            assert gap >= 0
            gaps.append(gap)
        assert gaps == sorted(gaps)  # the saving grows with the degree

    def test_gap_grows_with_width(self):
        degree = 4
        gaps = [sig_dim(w, degree) - 1 - logsig_dim(w, degree) for w in range(2, 6)]
        assert gaps == sorted(gaps) and gaps[0] < gaps[-1]

    def test_witt_number_known_value(self):
        assert witt_number(5, 6) == 2580


class TestBasisStructure:
    def test_expansions_linearly_independent(self):
        for width, degree in [(2, 4), (3, 3)]:
            basis = enumerate_lyndon(width, degree)
            for n in range(1, degree + 1):
                words = basis.words_of_length(n)
                rows = np.zeros((len(words), width**n))
                for i, w in enumerate(words):
                    exp = basis.expansions[basis.word_position(w)]
                    for u, c in exp.items():
                        rows[i, word_index(u, width)] = c
                assert np.linalg.matrix_rank(rows) == len(words)

    def test_bracket_of_two_letters(self):
        basis = enumerate_lyndon(2, 2)
        exp = basis.expansions[basis.word_position((1, 2))]
        assert exp == {(1, 2): 1, (2, 1): -1}

    def test_level_system_unitriangular(self):
        basis = enumerate_lyndon(3, 4)
        for n in range(1, 5):
            _, matrix = basis.level_system(n)
            assert np.allclose(np.diag(matrix), 1.0)
            assert np.allclose(np.triu(matrix, k=1), 0.0)


class TestProjection:
    def test_level_one_coordinates_are_letters(self):
        basis = enumerate_lyndon(3, 2)
        t = TruncatedTensor.from_level_one([2.0, -1.0, 0.5], 2)
        coords = project_to_basis(t, basis)
        assert np.allclose(coords[:3], [2.0, -1.0, 0.5])
        assert np.allclose(coords[3:], 0.0)

    def test_single_bracket_coordinate(self):
        basis = enumerate_lyndon(2, 2)
        coords = np.array([0.0, 0.0, 1.0])
        t = expand_from_basis(coords, basis)
        assert np.allclose(t.levels[2].reshape(2, 2), [[0.0, 1.0], [-1.0, 0.0]])

    def test_zero_coordinates_give_zero_tensor(self):
        basis = enumerate_lyndon(2, 3)
        t = expand_from_basis(np.zeros(basis.dim), basis)
        assert t.allclose(TruncatedTensor.zero(2, 3))

    def test_expansion_is_linear(self):
        rng = np.random.default_rng(0)
        basis = enumerate_lyndon(3, 3)
        c1, c2 = rng.normal(size=basis.dim), rng.normal(size=basis.dim)
        a, b = rng.normal(), rng.normal()
        combined = expand_from_basis(a * c1 + b * c2, basis)
        split = a * expand_from_basis(c1, basis) + b * expand_from_basis(c2, basis)
        assert combined.allclose(split, atol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_project_expand_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        basis = enumerate_lyndon(3, 4)
        coords = rng.uniform(-1, 1, basis.dim)
        back = project_to_basis(expand_from_basis(coords, basis), basis)
        assert np.max(np.abs(back - coords)) <= 1e-10

    def test_non_lie_input_rejected(self):
        basis = enumerate_lyndon(2, 2)
        t = TruncatedTensor.zero(2, 2)
        t.levels[2][:] = [1.0, 0.0, 0.0, 0.0]  # symmetric part only
        with pytest.raises(ValueError, match="not a Lie element"):
            project_to_basis(t, basis)
        t2 = TruncatedTensor.unit(2, 2)
        with pytest.raises(ValueError, match="not a Lie element"):
            project_to_basis(t2, basis)

    def test_length_mismatch_rejected(self):
        basis = enumerate_lyndon(2, 2)
        with pytest.raises(ValueError, match="coordinates"):
            expand_from_basis(np.zeros(basis.dim + 1), basis)
