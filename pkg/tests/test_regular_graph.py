import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from contact_cutoff.errors import (
    ExhaustionError,
    GraphFormatError,
    GraphValidationError,
    PreconditionError,
)
from contact_cutoff.regular_graph import (
    Multigraph,
    SimpleRegularGraph,
    is_simple,
    read_graph,
    sample_matching,
    sample_simple,
    simple_exists,
    write_graph,
)
from oracles.matchings import edge_key, edge_mask, multigraph_law, simple_graph_law

# frozen from oracles.matchings.simple_graph_law / multigraph_law
K4_MASK = 63
MATCHINGS_4_3 = 10395
SIMPLE_MATCHINGS_K4 = 1296
MATCHINGS_6_3 = 34459425
SIMPLE_GRAPHS_6_3 = 70
MATCHINGS_PER_SIMPLE_6_3 = 46656
MULTIGRAPHS_4_3 = 47


def simple_edge_sets(n, d):
    """Every labeled simple d-regular graph on n vertices, by edge-subset enumeration."""
    from itertools import combinations

    pairs = list(combinations(range(n), 2))
    out = []
    for sub in combinations(pairs, n * d // 2):
        deg = Counter()
        for u, v in sub:
            deg[u] += 1
            deg[v] += 1
        if all(deg[v] == d for v in range(n)):
            out.append(edge_mask(n, sub))
    return out


def test_oracle_values_frozen():
    total, law = simple_graph_law(4, 3)
    assert total == MATCHINGS_4_3 and law == {K4_MASK: SIMPLE_MATCHINGS_K4}
    assert len(multigraph_law(4, 3)) == MULTIGRAPHS_4_3


@pytest.mark.slow
def test_oracle_six_three_frozen():
    total, law = simple_graph_law(6, 3)
    assert total == MATCHINGS_6_3
    assert len(law) == SIMPLE_GRAPHS_6_3
    assert set(law.values()) == {MATCHINGS_PER_SIMPLE_6_3}
    assert sorted(law) == sorted(simple_edge_sets(6, 3))


def test_matching_is_involution(rng):
    for n, d in [(2, 1), (3, 2), (10, 3), (7, 4)]:
        g = sample_matching(n, d, rng)
        g.check()
        assert np.bincount(g.targets, minlength=n).sum() == n * d


def test_odd_half_edges_rejected(rng):
    with pytest.raises(PreconditionError):
        sample_matching(3, 3, rng)


def test_n4_d3_simple_is_always_k4(rng):
    for _ in range(500):
        g = sample_simple(4, 3, rng)
        assert edge_mask(4, g.edges()) == K4_MASK


def test_simple_exists():
    assert simple_exists(4, 3) and not simple_exists(3, 3) and not simple_exists(4, 4)
    assert simple_exists(5, 2)


def test_no_simple_graph_raises(rng):
    with pytest.raises(PreconditionError):
        sample_simple(4, 4, rng)


def test_exhaustion(rng):
    with pytest.raises(ExhaustionError) as info:
        sample_simple(40, 12, rng, max_attempts=2)
    assert info.value.attempts == 2


def test_multigraph_law_n4_d3(rng):
    law = multigraph_law(4, 3)
    keys = sorted(law)
    index = {k: i for i, k in enumerate(keys)}
    R = 50_000
    obs = np.zeros(len(keys))
    for _ in range(R):
        g = sample_matching(4, 3, rng)
        obs[index[edge_key(g.partner, 3)]] += 1
    exp = np.array([law[k] for k in keys], dtype=float) / MATCHINGS_4_3 * R
    assert chisquare(obs, exp).pvalue > 0.01


@pytest.mark.slow
def test_simple_uniform_n6_d3(rng):
    masks = simple_edge_sets(6, 3)
    index = {m: i for i, m in enumerate(masks)}
    obs = np.zeros(len(masks))
    R = 20_000
    for _ in range(R):
        obs[index[edge_mask(6, sample_simple(6, 3, rng).edges())]] += 1
    assert chisquare(obs).pvalue > 0.01


def test_is_simple():
    loop = Multigraph(1, 2, np.array([1, 0]))
    assert not is_simple(loop)
    double = Multigraph(2, 2, np.array([2, 3, 0, 1]))
    assert not is_simple(double)
    tri = SimpleRegularGraph.from_adjacency([[1, 2], [0, 2], [0, 1]])
    assert is_simple(tri)
    with pytest.raises(GraphValidationError):
        SimpleRegularGraph.from_multigraph(double)


def test_check_rejects_bad_partner():
    with pytest.raises(GraphValidationError):
        Multigraph(2, 1, np.array([0, 1])).check()
    with pytest.raises(GraphValidationError):
        Multigraph(3, 2, np.array([1, 2, 0, 4, 5, 3])).check()


def test_adjacency_roundtrip_slots(rng):
    g = sample_simple(20, 3, rng)
    h = SimpleRegularGraph.from_adjacency(g.adjacency)
    h.check()
    assert h.label_key() == g.label_key()


def test_write_read_roundtrip(rng, tmp_path):
    g = sample_simple(30, 3, rng)
    p = tmp_path / "g.txt"
    write_graph(g, p)
    h = read_graph(p)
    assert np.array_equal(h.adjacency, g.adjacency)
    assert p.read_text().splitlines()[0] == "30 3"


def test_write_multigraph_layout():
    buf = io.StringIO()
    write_graph(Multigraph(2, 2, np.array([1, 0, 3, 2])), buf)
    assert buf.getvalue() == "2 2\n0 0\n1 1\n"


@pytest.mark.parametrize(
    "text, err, line",
    [
        ("", GraphFormatError, 1),
        ("4\n", GraphFormatError, 1),
        ("4 3\n1 2 3\n0 2 3\n", GraphFormatError, 4),
        ("4 3\n1 2 3\n0 2 x\n0 1 3\n0 1 2\n", GraphFormatError, 3),
        ("4 3\n1 2 9\n0 2 3\n0 1 3\n0 1 2\n", GraphFormatError, 2),
        ("4 3\n2 1 3\n0 2 3\n0 1 3\n0 1 2\n", GraphFormatError, 2),
    ],
)
def test_read_format_errors(text, err, line):
    with pytest.raises(err) as info:
        read_graph(io.StringIO(text))
    assert info.value.line == line


@pytest.mark.parametrize(
    "text",
    [
        "4 3\n1 2\n0 2 3\n0 1 3\n0 1 2\n",
        "4 3\n1 1 3\n0 2 3\n0 1 3\n0 1 2\n",
        "4 3\n0 2 3\n0 2 3\n0 1 3\n0 1 2\n",
        "4 3\n1 2 3\n0 2 3\n0 1 3\n0 1 3\n",
    ],
)
def test_read_validation_errors(text):
    with pytest.raises(GraphValidationError):
        read_graph(io.StringIO(text))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 30), d=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_property_matching_valid(n, d, seed):
    if (n * d) % 2:
        return
    g = sample_matching(n, d, np.random.default_rng(seed))
    g.check()
    assert g.edges().shape == (n * d // 2, 2)
    assert np.all(np.bincount(g.edges().ravel(), minlength=n) == d)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(4, 40), seed=st.integers(0, 2**32 - 1))
def test_property_simple_roundtrip(n, seed):
    if n % 2:
        n += 1
    g = sample_simple(n, 3, np.random.default_rng(seed))
    assert is_simple(g)
    buf = io.StringIO()
    write_graph(g, buf)
    buf.seek(0)
    assert np.array_equal(read_graph(buf).adjacency, g.adjacency)
