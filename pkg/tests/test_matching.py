import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groundcite.matching import matching_value, max_weight_matching
from oracles import brute_force_matching_value


def test_identity_matrix_gives_diagonal():
    assert max_weight_matching(np.eye(3)) == [(0, 0), (1, 1), (2, 2)]


def test_two_by_two_example():
    scores = [[0.9, 0.1], [0.8, 0.2]]
    assert matching_value(scores) == pytest.approx(1.1)
    assert max_weight_matching(scores) == [(0, 0), (1, 1)]


def test_rectangular_matches_enumeration():
    rng = random.Random(1)
    scores = [[rng.random() for _ in range(5)] for _ in range(3)]
    assert matching_value(scores) == pytest.approx(
        brute_force_matching_value(scores), abs=1e-9
    )


def test_pairs_are_one_to_one_and_sum_to_value():
    rng = random.Random(2)
    scores = [[rng.random() for _ in range(4)] for _ in range(6)]
    pairs = max_weight_matching(scores)
    assert len({i for i, _ in pairs}) == len(pairs)
    assert len({j for _, j in pairs}) == len(pairs)
    assert sum(scores[i][j] for i, j in pairs) == pytest.approx(
        matching_value(scores), abs=1e-9
    )


def test_tie_break_prefers_smallest_pairs():
    # Both diagonals have total 2; the lexicographically smallest list wins.
    assert max_weight_matching([[1.0, 1.0], [1.0, 1.0]]) == [(0, 0), (1, 1)]


def test_zero_matrix_gives_empty_matching():
    assert max_weight_matching([[0.0, 0.0], [0.0, 0.0]]) == []
    assert matching_value([[0.0, 0.0], [0.0, 0.0]]) == 0.0


def test_empty_inputs():
    assert max_weight_matching([], n_rows=0, n_cols=3) == []
    assert matching_value([], n_rows=0, n_cols=0) == 0.0


def test_invalid_scores_rejected():
    with pytest.raises(ValueError):
        matching_value([[1.0, -0.1]])
    with pytest.raises(ValueError):
        matching_value([[float("nan")]])
    with pytest.raises(ValueError):
        matching_value([[1.0]], n_rows=2)


@given(
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=1, max_value=6),
    st.randoms(use_true_random=False),
)
@settings(max_examples=150, deadline=None)
def test_value_matches_brute_force(rows, cols, rng):
    scores = [[rng.random() for _ in range(cols)] for _ in range(rows)]
    assert matching_value(scores) == pytest.approx(
        brute_force_matching_value(scores), abs=1e-9
    )
