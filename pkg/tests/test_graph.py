import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abpower.graph import (
    Graph,
    GraphParseError,
    degree_distribution,
    erdos_renyi,
    from_edges,
    generate_graph,
    neighborhood,
    parse_edge_list,
    preferential_attachment,
    serialize_edge_list,
    tail_slope,
)


def triangle():
    return from_edges(3, [(0, 1), (1, 2), (0, 2)])


def test_parse_path_graph():
    g = parse_edge_list("0 1\n1 2\n", directed=False)
    assert g.n == 3
    assert g.num_edges == 2


def test_parse_dedupes_and_drops_self_loops():
    g = parse_edge_list("0 1\n1 0\n# c\n0 0\n", directed=False)
    assert g.n == 2
    assert g.edge_set() == {(0, 1)}


def test_parse_directed_keeps_both_directions():
    g = parse_edge_list("0 1\n1 0\n0 1\n", directed=True)
    assert g.edge_set() == {(0, 1), (1, 0)}


def test_parse_compacts_in_first_appearance_order():
    g = parse_edge_list("10 7\n7 42\n", directed=True)
    assert g.n == 3
    assert g.node_ids == (10, 7, 42)
    assert g.edge_set() == {(0, 1), (1, 2)}


@pytest.mark.parametrize(
    "text, line",
    [("0 1\n1 x\n", 2), ("0 1 2\n", 1), ("5\n", 1), ("0 -1\n", 1)],
)
def test_parse_errors_carry_line_number(text, line):
    with pytest.raises(GraphParseError) as info:
        parse_edge_list(text, directed=False)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


@pytest.mark.parametrize("text", ["", "# only a comment\n", "\n\n"])
def test_parse_empty_input(text):
    with pytest.raises(GraphParseError):
        parse_edge_list(text, directed=False)


def test_explicit_node_count_allows_isolated_nodes():
    g = parse_edge_list("0 1\n", directed=False, n=5)
    assert g.n == 5
    assert g.degrees().tolist() == [1, 1, 0, 0, 0]
    with pytest.raises(GraphParseError):
        parse_edge_list("0 7\n", directed=False, n=5)


def test_header_conflict_is_rejected():
    with pytest.raises(GraphParseError):
        parse_edge_list("# directed=true\n0 1\n", directed=False)


def test_graph_invariants_enforced():
    with pytest.raises(ValueError):
        from_edges(2, [(0, 0)])
    with pytest.raises(ValueError):
        from_edges(2, [(0, 2)])
    g = from_edges(3, [(2, 0), (0, 2), (1, 0)])
    assert g.edge_set() == {(0, 2), (0, 1)}


def test_neighborhood_undirected_and_star():
    assert neighborhood(triangle(), 0) == {1, 2}
    star = from_edges(6, [(0, k) for k in range(1, 6)])
    assert len(neighborhood(star, 0)) == 5
    assert neighborhood(star, 3) == {0}


def test_neighborhood_directed_means_followed():
    g = from_edges(2, [(0, 1)], directed=True)
    assert neighborhood(g, 0) == {1}
    assert neighborhood(g, 1) == set()


def test_neighborhood_out_of_range():
    with pytest.raises(IndexError):
        neighborhood(triangle(), 3)
    with pytest.raises(IndexError):
        neighborhood(triangle(), -1)


def test_degree_distribution_small_graphs():
    assert degree_distribution(triangle()).entries == ((2, 1.0),)
    path = parse_edge_list("0 1\n1 2\n")
    dist = degree_distribution(path, "undirected")
    assert dist.degrees.tolist() == [1, 2]
    assert dist.probabilities == pytest.approx([2 / 3, 1 / 3], abs=1e-15)


def test_degree_distribution_mode_mismatch():
    with pytest.raises(ValueError):
        degree_distribution(triangle(), "in")
    with pytest.raises(ValueError):
        degree_distribution(from_edges(2, [(0, 1)], directed=True), "undirected")


def test_directed_degree_modes():
    g = from_edges(3, [(0, 1), (0, 2), (1, 2)], directed=True)
    assert g.degrees("out").tolist() == [2, 1, 0]
    assert g.degrees("in").tolist() == [0, 1, 2]


def test_preferential_attachment_tail_is_scale_free():
    g = preferential_attachment(2000, 3, seed=0)
    slope = tail_slope(degree_distribution(g), min_degree=3)
    assert -3.5 <= slope <= -1.5


def test_generators_small_cases():
    k5 = generate_graph("erdos_renyi", seed=1, n=5, edge_prob=1.0)
    assert k5.num_edges == 10
    assert generate_graph("erdos_renyi", seed=1, n=100, edge_prob=0.0).num_edges == 0
    pa = generate_graph("preferential_attachment", seed=3, n=100, m=2)
    assert pa.num_edges == math.comb(3, 2) + 97 * 2


@pytest.mark.parametrize(
    "model, params",
    [
        ("erdos_renyi", dict(n=1, edge_prob=0.5)),
        ("erdos_renyi", dict(n=5, edge_prob=1.5)),
        ("preferential_attachment", dict(n=5, m=0)),
        ("preferential_attachment", dict(n=5, m=5)),
        ("watts_strogatz", dict(n=5)),
    ],
)
def test_generator_rejects_bad_parameters(model, params):
    with pytest.raises(ValueError):
        generate_graph(model, seed=0, **params)


def test_generators_are_reproducible():
    a = preferential_attachment(300, 3, seed=11)
    b = preferential_attachment(300, 3, seed=11)
    assert np.array_equal(a.edges, b.edges)
    assert not np.array_equal(a.edges, preferential_attachment(300, 3, seed=12).edges)
    e1, e2 = erdos_renyi(200, 0.05, seed=4), erdos_renyi(200, 0.05, seed=4)
    assert e1.edges.tobytes() == e2.edges.tobytes()


def test_pa_has_no_multi_edges_and_min_degree_m():
    g = preferential_attachment(400, 4, seed=2)
    assert len(g.edge_set()) == g.num_edges
    assert g.degrees().min() >= 4


edge_lists = st.lists(
    st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=1, max_size=60
).filter(lambda es: any(u != v for u, v in es))


@settings(max_examples=60, deadline=None)
@given(edge_lists, st.booleans())
def test_serialize_round_trip(edges, directed):
    text = "".join(f"{u} {v}\n" for u, v in edges)
    g = parse_edge_list(text, directed=directed)
    again = parse_edge_list(serialize_edge_list(g))
    assert again.n == g.n
    assert again.directed == g.directed
    assert again.edge_set() == g.edge_set()


@settings(max_examples=60, deadline=None)
@given(edge_lists, st.booleans())
def test_degree_sums(edges, directed):
    text = "".join(f"{u} {v}\n" for u, v in edges)
    g = parse_edge_list(text, directed=directed)
    if directed:
        assert g.degrees("out").sum() == g.num_edges == g.degrees("in").sum()
        modes = ("in", "out")
    else:
        assert g.degrees().sum() == 2 * g.num_edges
        modes = ("undirected",)
    for mode in modes:
        assert math.isclose(degree_distribution(g, mode).probabilities.sum(), 1.0, abs_tol=1e-9)


def test_graph_is_read_only():
    g = triangle()
    with pytest.raises(ValueError):
        g.edges[0, 0] = 2
    assert isinstance(g, Graph)


def test_twitter_dataset_when_available():
    import os

    path = os.environ.get("ABPOWER_TWITTER_EDGES")
    if not path or not os.path.exists(path):
        pytest.skip("ego-Twitter edge file not available")
    from abpower.graph import read_edge_list

    g = read_edge_list(path, directed=True)
    assert g.n == 81306
    assert g.num_edges == 2420766
