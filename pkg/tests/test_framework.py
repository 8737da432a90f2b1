import json
from fractions import Fraction

import numpy as np
import pytest

from conftest import DATA
from unirigid import (AnchoredNetwork, DegenerateSpan, Framework, ParseError, VertexIndexError,
                      check_general_position, extended_position_matrix, read_framework,
                      write_framework)


def test_line_extended_matrix():
    F = Framework(np.array([[0, 1, 2]], dtype=object), {(1, 2), (2, 3)})
    assert extended_position_matrix(F).tolist() == [[0, 1, 2], [1, 1, 1]]


def test_example_extended_matrix(ex1):
    A = extended_position_matrix(ex1)
    assert A.shape == (3, 7) and all(x == 1 for x in A[2])
    assert A[1, 2] == Fraction(1, 2)


def test_coincident_points_do_not_span():
    F = Framework(np.array([[1, 1, 1], [2, 2, 2]], dtype=object), set())
    with pytest.raises(DegenerateSpan):
        extended_position_matrix(F)


def test_general_position_scan(ex1):
    assert check_general_position(ex1, "full").ok
    assert check_general_position(ex1, "lazy").ok
    F = Framework(np.array([[0, 1, 2, 0], [0, 1, 2, 5]], dtype=object), set())
    gp = check_general_position(F, "full")
    assert not gp.ok and gp.subset == (1, 2, 3)
    simplex = Framework(np.array([[0, 1, 0], [0, 0, 1]], dtype=object), set())
    assert check_general_position(simplex, "full").ok


def test_fixture_parses(ex1):
    assert (ex1.n, ex1.d, len(ex1.edges)) == (7, 2, 15)
    assert ex1.exact


def test_minimal_instance_accepted():
    F = read_framework('{"dim": 0, "positions": [[]], "edges": []}')
    assert (F.n, F.d) == (1, 0)


@pytest.mark.parametrize("text,field", [
    ('{"dim": 1, "positions": [["1/0"], [1]]}', "positions[0][0]"),
    ('{"dim": 1, "positions": [["x"]]}', "positions[0][0]"),
    ('{"dim": 1}', "positions"),
    ('{"dim": 1, "positions": [[1], [2]], "anchors": 1, "anchor_edges": [[1, 1]]}', None),
])
def test_parse_errors(text, field):
    with pytest.raises(ParseError) as err:
        read_framework(text)
    if field:
        assert err.value.field == field


def test_bad_json_reports_line():
    with pytest.raises(ParseError) as err:
        read_framework('{\n"dim": 1,\n oops}')
    assert err.value.line == 3


def test_out_of_range_vertex():
    with pytest.raises(VertexIndexError):
        read_framework('{"dim": 1, "positions": [[0], [1]], "edges": [[1, 3]]}')
    with pytest.raises(IndexError):
        read_framework('{"dim": 1, "positions": [[0], [1]], "edges": [[0, 1]]}')


def test_self_loops_and_dimension_rejected():
    with pytest.raises(ParseError):
        read_framework('{"dim": 1, "positions": [[0], [1]], "edges": [[1, 1]]}')
    with pytest.raises(ParseError):
        read_framework('{"dim": 2, "positions": [[0, 0], [1, 1]], "edges": []}')


def test_decimals_select_float(ex1):
    F = read_framework('{"dim": 1, "positions": [[0.5], [1]], "edges": [[1, 2]]}')
    assert not F.exact and F.P.dtype == np.float64


def test_round_trip_is_canonical(ex2):
    text = write_framework(ex2)
    again = read_framework(text)
    assert write_framework(again) == text
    assert np.array_equal(again.P, ex2.P) and again.edges == ex2.edges
    assert json.loads(text)["positions"][2] == [0, "1/2"]


def test_anchored_round_trip_and_checks():
    doc = {"dim": 1, "positions": [[0], [1], ["5/2"]], "edges": [],
           "anchors": 2, "anchor_edges": [[2, 1], [1, 1]]}
    net = read_framework(json.dumps(doc))
    assert isinstance(net, AnchoredNetwork) and (net.m, net.n) == (2, 1)
    assert read_framework(write_framework(net)).anchor_edges == net.anchor_edges
    assert (1, 2) in net.combined_edges()
    with pytest.raises(ValueError):
        AnchoredNetwork(np.array([[0]], dtype=object), np.array([[1]], dtype=object), set(), {(1, 1)})
