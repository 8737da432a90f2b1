from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unirigid import (AnchoredNetwork, DimensionMismatch, Framework, ParseError, anchored_stress,
                      check_certificate, compute_stress_matrix, export_anchored_sdp,
                      export_realization_sdp, extended_position_matrix, gale_matrix, numerics,
                      pre_stress, random_framework, random_network, read_matrix_text, read_sdpa,
                      write_matrix_text, write_sdpa, z_matrix)
from unirigid.sdp import SdpProblem, format_value


def obj(rows):
    return numerics.as_backend(np.array(rows, dtype=object), numerics.RATIONAL)


def test_triangle_on_a_line():
    F = Framework(obj([[0, 1, 2]]), {(1, 2), (1, 3), (2, 3)})
    p = export_realization_sdp(F)
    assert p.m == 3 and p.rhs == [1, 4, 1]
    assert p.objective == []


def test_single_edge_matrix():
    F = Framework(obj([[0, 3]]), {(1, 2)})
    p = export_realization_sdp(F)
    assert p.dense(p.constraints[0]).tolist() == [[1, -1], [-1, 1]]
    assert p.rhs == [9]


def test_example_constraint_count(ex1):
    assert export_realization_sdp(ex1).m == 15


def test_overrides_and_trace_objective(ex1):
    p = export_realization_sdp(ex1, squared_lengths={(2, 1): Fraction(7)}, maximize_trace=True)
    assert p.rhs[0] == 7
    assert len(p.objective) == 7


def test_anchored_pinning_only():
    net = AnchoredNetwork(obj([[0, 1, 0], [0, 0, 1]]), obj([[5], [5]]), set(), set())
    p = export_anchored_sdp(net)
    assert p.m == 3 and p.rhs == [1, 0, 1]
    assert p.dense(p.constraints[1])[0, 1] == Fraction(1, 2)


def test_anchor_constraint_is_rank_one():
    net = AnchoredNetwork(obj([[0, 2, 0], [0, 0, 3]]), obj([[1], [1]]), set(), {(2, 1)})
    p = export_anchored_sdp(net)
    v = obj([-2, 0, 1])
    assert np.array_equal(p.dense(p.constraints[3]), np.multiply.outer(v, v))
    assert p.rhs[3] == 2


def test_two_anchor_network_exports():
    net = AnchoredNetwork(obj([[0, 1]]), obj([[3]]), set(), {(1, 1), (2, 1)})
    text = write_sdpa(export_anchored_sdp(net))
    assert read_sdpa(text) == export_anchored_sdp(net)


def test_round_trip(ex1):
    p = export_realization_sdp(ex1)
    text = write_sdpa(p)
    assert read_sdpa(text) == p
    assert write_sdpa(read_sdpa(text)) == text
    assert text.splitlines()[1].startswith("15")


def test_reader_accepts_punctuation_and_comments():
    text = '* comment\n"title"\n1\n1\n{2}\n{3.5}\n0 1 1 1 1\n1 1 1 2 0.5\n'
    p = read_sdpa(text)
    assert p.block_sizes == [2] and p.rhs == [Fraction(7, 2)]
    assert p.constraints[0] == [(1, 1, 2, Fraction(1, 2))]


@pytest.mark.parametrize("text", ["1\n1\n", "1\n1\n2\n1\n1 1 3 3 1\n", "1\n1\n2\n1\n0 1 1 x 1\n",
                                  "2\n1\n2\n1\n"])
def test_reader_rejects_garbage(text):
    with pytest.raises(ParseError):
        read_sdpa(text)


def test_value_formatting():
    assert format_value(Fraction(5, 8)) == "0.625"
    assert format_value(Fraction(-1, 20)) == "-0.05"
    assert format_value(Fraction(3)) == "3"
    assert float(format_value(Fraction(1, 3))) == 1 / 3


@settings(max_examples=100, deadline=None)
@given(st.integers(-10**6, 10**6), st.integers(0, 12), st.integers(0, 12))
def test_terminating_decimals_round_trip(num, twos, fives):
    v = Fraction(num, 2**twos * 5**fives)
    assert Fraction(format_value(v)) == v


def test_matrix_text_round_trip():
    M = obj([[1, Fraction(-1, 3)], [Fraction(-1, 3), 2]])
    assert np.array_equal(read_matrix_text(write_matrix_text(M)), M)
    F = np.array([[0.1, 2.5]])
    assert np.array_equal(read_matrix_text(write_matrix_text(F)), F)
    with pytest.raises(ParseError):
        read_matrix_text("2 2\n1 2 3")


def test_example_certificate(ex1):
    A = extended_position_matrix(ex1)
    S7 = pre_stress(gale_matrix(ex1)).S
    rep = check_certificate(A.T @ A, S7, export_realization_sdp(ex1))
    assert rep.primal_feasible and rep.complementary and rep.dual_objective_ok
    assert (rep.rank_primal, rep.rank_dual) == (3, 4) and rep.strictly_complementary


def test_zero_dual_is_not_strict(ex1):
    A = extended_position_matrix(ex1)
    rep = check_certificate(A.T @ A, numerics.zeros((7, 7), numerics.RATIONAL), export_realization_sdp(ex1))
    assert rep.complementary and not rep.strictly_complementary


def test_wrong_distance_is_flagged(ex1):
    A = extended_position_matrix(ex1)
    S7 = pre_stress(gale_matrix(ex1)).S
    p = export_realization_sdp(ex1, squared_lengths={(1, 2): Fraction(5)})
    rep = check_certificate(A.T @ A, S7, p)
    assert not rep.primal_feasible and rep.primal_residual == 1
    assert rep.complementary


def test_dimension_mismatch(ex1):
    with pytest.raises(DimensionMismatch):
        check_certificate(np.eye(3), np.eye(7), export_realization_sdp(ex1))


def test_stresses_are_dual_feasible_with_zero_objective():
    for seed in range(5):
        F = random_framework(2, 9, seed=seed, extra_edge_prob=0.1)
        S = compute_stress_matrix(F).stress.S
        A = extended_position_matrix(F)
        rep = check_certificate(A.T @ A, S, export_realization_sdp(F))
        assert rep.passed
        # multipliers are the edge stresses -S_ij
        p = export_realization_sdp(F)
        for y, (i, j) in zip(rep.multipliers, sorted(F.edges)):
            assert y == -S[i - 1, j - 1]


def test_anchored_certificate():
    net = random_network(2, 5, seed=7)
    res, _ = anchored_stress(net)
    rep = check_certificate(z_matrix(net.sensor_positions()), res.S, export_anchored_sdp(net))
    assert rep.passed and (rep.rank_primal, rep.rank_dual) == (2, 5)
