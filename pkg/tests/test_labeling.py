import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abpower.graph import erdos_renyi, from_edges, neighborhood, preferential_attachment
from abpower.labeling import (
    ClassLabels,
    assign_labels,
    neighborhood_switch_probs,
    read_labels,
    write_switch_probs,
)


def brute_force_probs(g, c):
    out = []
    for i in range(g.n):
        nbrs = neighborhood(g, i)
        if not nbrs:
            out.append(0.0)
            continue
        out.append(sum(c.is_a[u] != c.is_a[i] for u in nbrs) / len(nbrs))
    return np.array(out)


def test_assign_labels_ceil_rule():
    c = assign_labels(10, 0.3, seed=5)
    assert c.n_a == 3
    assert assign_labels(4, 0.0, seed=1).n_a == 0
    assert assign_labels(7, 0.5, seed=1).n_a == 4
    assert assign_labels(30, 0.1, seed=1).n_a == 3


def test_assign_labels_count_invariant_across_seeds():
    a, b = assign_labels(4, 0.5, seed=1), assign_labels(4, 0.5, seed=2)
    assert a.n_a == b.n_a == 2
    positions = {tuple(assign_labels(20, 0.5, seed=s).is_a) for s in range(10)}
    assert len(positions) > 1


def test_assign_labels_deterministic_and_validated():
    assert assign_labels(50, 0.3, seed=9) == assign_labels(50, 0.3, seed=9)
    with pytest.raises(ValueError):
        assign_labels(1, 0.5)
    with pytest.raises(ValueError):
        assign_labels(10, 1.2)


def test_labels_text_round_trip(tmp_path):
    c = ClassLabels.from_string("A,B,B")
    assert c.to_string() == "ABB"
    path = tmp_path / "labels.txt"
    path.write_text(c.to_lines())
    assert path.read_text() == "A\nB\nB\n"
    assert read_labels(path) == c
    with pytest.raises(ValueError):
        ClassLabels.from_string("A,C")


def test_triangle_switch_probs():
    g = from_edges(3, [(0, 1), (1, 2), (0, 2)])
    p = neighborhood_switch_probs(g, ClassLabels.from_string("ABB"))
    assert p.tolist() == [1.0, 0.5, 0.5]


def test_identical_labels_and_empty_graph_give_zero():
    g = erdos_renyi(30, 0.2, seed=1)
    assert not neighborhood_switch_probs(g, ClassLabels(np.ones(30, bool))).any()
    empty = erdos_renyi(30, 0.0, seed=1)
    assert not neighborhood_switch_probs(empty, assign_labels(30, 0.5, seed=3)).any()


def test_directed_probs_use_followed_accounts():
    # 0 follows 1 and 2; nobody follows 0 back
    g = from_edges(3, [(0, 1), (0, 2)], directed=True)
    p = neighborhood_switch_probs(g, ClassLabels.from_string("ABA"))
    assert p.tolist() == [0.5, 0.0, 0.0]


def test_length_mismatch():
    g = from_edges(3, [(0, 1)])
    with pytest.raises(ValueError):
        neighborhood_switch_probs(g, ClassLabels.from_string("AB"))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.floats(0, 1), st.integers(0, 10_000), st.booleans())
def test_matches_brute_force_and_complement(n, edge_prob, seed, directed):
    g = erdos_renyi(n, edge_prob, seed=seed)
    if directed:
        rng = np.random.default_rng(seed)
        g = from_edges(n, [e if rng.random() < 0.5 else e[::-1] for e in g.edge_set()], directed=True)
    c = assign_labels(n, 0.4, seed=seed)
    p = neighborhood_switch_probs(g, c)
    np.testing.assert_allclose(p, brute_force_probs(g, c), rtol=0, atol=1e-15)
    np.testing.assert_array_equal(p, neighborhood_switch_probs(g, c.complement()))
    assert np.all((p >= 0) & (p <= 1))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 79))
def test_non_neighbor_relabel_leaves_p_fixed(seed, i):
    g = preferential_attachment(80, 2, seed=seed)
    c = assign_labels(80, 0.5, seed=seed)
    before = neighborhood_switch_probs(g, c)[i]
    others = [j for j in range(80) if j != i and j not in neighborhood(g, i)]
    flipped = c.is_a.copy()
    flipped[others] = ~flipped[others]
    assert neighborhood_switch_probs(g, ClassLabels(flipped))[i] == before


def test_mean_exposure_small_er():
    # cheaper cousin of the acceptance check: 10 draws on n=400
    g = erdos_renyi(400, 0.03, seed=3)
    for p_a in (0.2, 0.5):
        means = [neighborhood_switch_probs(g, assign_labels(400, p_a, seed=s)).mean() for s in range(10)]
        assert abs(np.mean(means) - 2 * p_a * (1 - p_a)) < 0.03


def test_write_switch_probs_uses_original_ids(tmp_path):
    from abpower.graph import parse_edge_list

    g = parse_edge_list("10 20\n20 30\n")
    c = ClassLabels.from_string("ABA")
    path = tmp_path / "p.csv"
    write_switch_probs(path, neighborhood_switch_probs(g, c), g)
    assert path.read_text() == "node_id,p\n10,1\n20,1\n30,1\n"
