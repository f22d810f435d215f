"""Graph construction, Laplacians, degree statistics, and spectral moments."""

import io

import numpy as np
import pytest

from netspectra import datasets
from netspectra import graphs as G


# ---------------------------------------------------------------------------
# Laplacian construction


def test_laplacian_directed_hand_example():
    # Edges 0->1 (w=2) and 1->2 (w=0.5).  Rows are source vertices: the
    # diagonal holds out-degrees (2, 0.5, 0) and entry (src, dst) holds -w.
    g = G.WeightedDigraph(n=3, edges=((0, 1, 2.0), (1, 2, 0.5)), directed=True)
    expected = np.array(
        [
            [2.0, -2.0, 0.0],
            [0.0, 0.5, -0.5],
            [0.0, 0.0, 0.0],
        ]
    )
    assert np.array_equal(G.laplacian(g), expected)


def test_laplacian_undirected_hand_example():
    g = G.WeightedDigraph(n=3, edges=((0, 1, 2.0), (1, 2, 0.5)), directed=False)
    expected = np.array(
        [
            [2.0, -2.0, 0.0],
            [-2.0, 2.5, -0.5],
            [0.0, -0.5, 0.5],
        ]
    )
    assert np.array_equal(G.laplacian(g), expected)


def test_laplacian_structure_many_random_graphs():
    """Constant vectors lie in the kernel of every Laplacian produced here.

    L @ 1 == 0 exactly up to float accumulation, off-diagonal entries are
    -w <= 0, and undirected graphs give symmetric matrices.
    """
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(2, 12))
        g = G.gen_erdos_renyi(
            n,
            float(rng.uniform(0.1, 0.9)),
            weight_dist="uniform(0.1, 2.0)",
            seed=int(rng.integers(2**31)),
            directed=bool(rng.integers(2)),
        )
        L = G.laplacian(g)
        assert np.max(np.abs(L @ np.ones(n))) < 1e-12
        off = L - np.diag(np.diag(L))
        assert np.all(off <= 0.0)
        if not g.directed:
            assert np.array_equal(L, L.T)


def test_weight_matrix_matches_laplacian():
    g = G.gen_erdos_renyi(8, 0.5, weight_dist="uniform(0.2, 0.8)", seed=4)
    W = G.weight_matrix(g)
    L = G.laplacian(g)
    assert np.allclose(L, np.diag(W.sum(axis=1)) - W)


def test_graph_validation_errors():
    with pytest.raises(ValueError):
        G.WeightedDigraph(n=0, edges=())
    with pytest.raises(ValueError):
        G.WeightedDigraph(n=3, edges=((0, 0, 1.0),))  # self-loop
    with pytest.raises(ValueError):
        G.WeightedDigraph(n=3, edges=((0, 5, 1.0),))  # out of range
    with pytest.raises(ValueError):
        G.WeightedDigraph(n=3, edges=((0, 1, -1.0),))  # nonpositive weight
    with pytest.raises(ValueError):
        # (1, 0) normalizes to (0, 1) for undirected graphs -> duplicate.
        G.WeightedDigraph(n=3, edges=((0, 1, 1.0), (1, 0, 2.0)))


def test_undirected_edges_are_canonicalized():
    g = G.WeightedDigraph(n=3, edges=((1, 0, 2.0), (2, 1, 0.5)))
    assert g.edges == ((0, 1, 2.0), (1, 2, 0.5))
    # Directed graphs keep both orientations as distinct edges.
    gd = G.WeightedDigraph(n=3, edges=((0, 1, 1.0), (1, 0, 2.0)), directed=True)
    assert gd.num_edges == 2


# ---------------------------------------------------------------------------
# Degree statistics and exact spectral moments


def test_degree_stats_hand_example():
    # Directed out-degrees are (2, 0.5, 0):
    #   mean = 2.5/3, quadratic mean = (4 + 0.25 + 0)/3.
    g = G.WeightedDigraph(n=3, edges=((0, 1, 2.0), (1, 2, 0.5)), directed=True)
    st = G.degree_stats(g)
    assert st.d_min == 0.0
    assert st.d_max == 2.0
    assert st.mean_degree == pytest.approx(2.5 / 3)
    assert st.quad_mean_degree == pytest.approx(4.25 / 3)


def test_exact_spectral_moments_hand_example():
    # L = [[2, -2, 0], [-2, 2.5, -0.5], [0, -0.5, 0.5]]:
    #   tr L   = 5                -> M1 = 5/3
    #   tr L^2 = sum_ij L_ij L_ji = (4 + 6.25 + 0.25) + 2*(4 + 0.25) = 19
    #                             -> M2 = 19/3
    g = G.WeightedDigraph(n=3, edges=((0, 1, 2.0), (1, 2, 0.5)))
    sm = G.exact_spectral_moments(g, 2)
    assert sm[0] == 1.0
    assert sm[1] == pytest.approx(5.0 / 3.0, abs=1e-14)
    assert sm[2] == pytest.approx(19.0 / 3.0, abs=1e-13)
    assert sm.k_max == 2


def test_exact_spectral_moments_match_eigenvalues():
    # Independent route: M_k = mean(lambda^k) over the Laplacian spectrum.
    g = G.gen_erdos_renyi(12, 0.4, weight_dist="uniform(0.3, 1.2)", seed=9)
    lam = np.linalg.eigvalsh(G.laplacian(g))
    sm = G.exact_spectral_moments(g, 4)
    for k in range(5):
        assert sm[k] == pytest.approx(float(np.mean(lam**k)), rel=1e-10)


def test_degree_bounds_from_spectrum():
    # Bounds scale the extreme eigenvalues by (n-1)/n.
    lo, hi = G.degree_bounds_from_spectrum(18.378, 46.286, 101)
    assert lo == pytest.approx(18.378 * 100 / 101)
    assert hi == pytest.approx(46.286 * 100 / 101)
    with pytest.raises(ValueError):
        G.degree_bounds_from_spectrum(1.0, 2.0, 1)


def test_degree_bounds_hold_on_random_graphs():
    # For connected undirected graphs: d_min >= (n-1)/n lambda_2 and
    # d_max <= (n-1)/n lambda_n.
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 50:
        n = int(rng.integers(4, 20))
        g = G.gen_erdos_renyi(n, 0.6, seed=int(rng.integers(2**31)))
        if len(G.connected_components(g)) != 1:
            continue
        lam = np.sort(np.linalg.eigvalsh(G.laplacian(g)))
        lo, hi = G.degree_bounds_from_spectrum(lam[1], lam[-1], n)
        st = G.degree_stats(g)
        assert st.d_min >= lo - 1e-9
        assert st.d_max <= hi + 1e-9
        checked += 1


def test_degree_stats_from_moments():
    # M1 = 30, M2 = 930: mean degree 30 exactly, quadratic mean in
    # [max(30^2, 930/2), 930] = [900, 930].
    b = G.degree_stats_from_moments(30.0, 930.0)
    assert b.mean_degree == 30.0
    assert b.quad_low == 900.0
    assert b.quad_high == 930.0
    assert b.consistent
    # Noisy estimates can violate M2 >= M1^2; flagged, not fatal.
    bad = G.degree_stats_from_moments(3.0, 3.0)
    assert not bad.consistent
    assert bad.quad_low == bad.quad_high == 3.0


# ---------------------------------------------------------------------------
# Random graph generators


def test_gen_erdos_renyi_determinism_and_ranges():
    a = G.gen_erdos_renyi(40, 0.3, weight_dist="uniform(0.2, 0.8)", seed=11)
    b = G.gen_erdos_renyi(40, 0.3, weight_dist="uniform(0.2, 0.8)", seed=11)
    c = G.gen_erdos_renyi(40, 0.3, weight_dist="uniform(0.2, 0.8)", seed=12)
    assert a.edges == b.edges
    assert a.edges != c.edges
    assert all(0.2 <= w <= 0.8 for _, _, w in a.edges)
    assert all(i != j for i, j, _ in a.edges)


def test_gen_erdos_renyi_edge_count_statistics():
    # Undirected n=100, p=0.3: E[edges] = C(100,2) * 0.3 = 1485 and
    # sd(edges) = sqrt(4950 * 0.3 * 0.7) = 32.24.  Over 60 seeds the mean
    # edge count has sd 32.24/sqrt(60) = 4.16; allow 3.5 sigma ~ 14.6.
    counts = [G.gen_erdos_renyi(100, 0.3, seed=s).num_edges for s in range(60)]
    assert abs(float(np.mean(counts)) - 1485.0) < 14.6


def test_gen_erdos_renyi_directed_doubles_slots():
    # Directed graphs draw each ordered pair independently:
    # E[edges] = 100*99*0.2 = 1980, sd = sqrt(9900*0.2*0.8) = 39.8.
    g = G.gen_erdos_renyi(100, 0.2, seed=3, directed=True)
    assert abs(g.num_edges - 1980) < 4 * 39.8


def test_gen_degree_sequence_constant_is_regular():
    # A constant degree sequence is realizable exactly; the pairing must
    # terminate with every vertex at degree 2 (a disjoint union of cycles).
    g = G.gen_degree_sequence(30, "constant(2)", seed=1)
    L = G.laplacian(g)
    assert np.allclose(np.diag(L), 2.0)


def test_gen_degree_sequence_tracks_target_mean():
    """Realized degrees follow the drawn sequence closely.

    Degrees are drawn from normal(34, 28) clipped to [0, n-1]; at n = 100
    the clipped mean is ~34.4.  Collision repair may drop a small fraction
    of stub pairs, so per-graph means scatter around a value slightly below
    that.  Over 10 seeds the grand mean stays within a few degrees.
    """
    means = []
    for seed in range(10):
        g = G.gen_degree_sequence(100, "normal(34, 28)", seed=seed)
        degs = np.diag(G.laplacian(G.unweight(g)))
        assert degs.max() <= 99
        means.append(float(degs.mean()))
    assert 31.0 < float(np.mean(means)) < 37.5


def test_gen_degree_sequence_simple_graph_invariants():
    g = G.gen_degree_sequence(60, "normal(10, 3)", weight_dist="uniform(0.5, 1.5)", seed=7)
    pairs = [(i, j) for i, j, _ in g.edges]
    assert len(pairs) == len(set(pairs))  # no duplicate edges
    assert all(i < j for i, j in pairs)  # undirected canonical form
    assert all(i != j for i, j in pairs)  # no self-loops
    assert all(0.5 <= w <= 1.5 for _, _, w in g.edges)


def test_gen_degree_sequence_unrealizable_raises():
    # Half the vertices ask for degree 90 while the other half ask for 0:
    # at most ~50 vertices can supply neighbors, so most stub pairs collide
    # and the construction must give up rather than return a mangled graph.
    with pytest.raises(G.GraphGenerationError):
        G.gen_degree_sequence(100, "two_point(90, 0, 0.5)", seed=0)


# ---------------------------------------------------------------------------
# Edge-list I/O


def test_edge_list_round_trip(tmp_path):
    g = G.gen_erdos_renyi(25, 0.3, weight_dist="uniform(0.1, 0.9)", seed=6)
    path = tmp_path / "graph.edges"
    G.write_edge_list(g, path)
    back = G.load_edge_list(path)
    assert back.n == g.n
    assert back.directed == g.directed
    assert len(back.edges) == len(g.edges)
    for (i, j, w), (bi, bj, bw) in zip(g.edges, back.edges):
        assert (i, j) == (bi, bj)
        assert w == pytest.approx(bw, rel=1e-11)


def test_load_edge_list_parsing():
    text = io.StringIO("# comment\n0 1\n1 2 0.5\n\n2 0 2.0  # trailing comment\n")
    g = G.load_edge_list(text)
    assert g.n == 3
    assert g.edges == ((0, 1, 1.0), (0, 2, 2.0), (1, 2, 0.5))


def test_load_edge_list_merges_symmetric_duplicates():
    # Files listing both directions of an undirected edge parse cleanly when
    # the weights agree ...
    g = G.load_edge_list(io.StringIO("0 1 2.0\n1 0 2.0\n"))
    assert g.edges == ((0, 1, 2.0),)
    # ... and fail loudly when they conflict.
    with pytest.raises(ValueError, match="different weight"):
        G.load_edge_list(io.StringIO("0 1 2.0\n1 0 3.0\n"))


def test_load_edge_list_errors():
    with pytest.raises(ValueError, match="line 1"):
        G.load_edge_list(io.StringIO("0\n"))
    with pytest.raises(ValueError, match="self-loop"):
        G.load_edge_list(io.StringIO("2 2\n"))
    with pytest.raises(ValueError, match="n=2"):
        G.load_edge_list(io.StringIO("0 5\n"), n=2)


# ---------------------------------------------------------------------------
# Graph surgery helpers


def test_unweight_and_relabel():
    g = G.WeightedDigraph(n=3, edges=((0, 1, 2.0), (1, 2, 0.5)))
    u = G.unweight(g)
    assert all(w == 1.0 for _, _, w in u.edges)
    r = G.relabel(g, [2, 0, 1])  # 0->2, 1->0, 2->1
    assert r.edges == ((0, 1, 0.5), (0, 2, 2.0))
    with pytest.raises(ValueError):
        G.relabel(g, [0, 0, 1])


def test_remove_edges():
    g = G.WeightedDigraph(n=4, edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)))
    cut = G.remove_edges(g, [(2, 1)])  # unordered pair for undirected graphs
    assert cut.edges == ((0, 1, 1.0), (2, 3, 1.0))
    with pytest.raises(ValueError, match="not in graph"):
        G.remove_edges(g, [(0, 3)])


def test_add_pendant_vertex():
    g = G.WeightedDigraph(n=3, edges=((0, 1, 1.0), (1, 2, 1.0)))
    grown = G.add_pendant_vertex(g, attach_to=2, weight=0.7)
    assert grown.n == 4
    assert (2, 3, 0.7) in grown.edges
    # The new vertex has degree exactly one.
    assert float(G.laplacian(grown)[3, 3]) == 0.7
    with pytest.raises(ValueError):
        G.add_pendant_vertex(G.WeightedDigraph(n=2, edges=((0, 1, 1.0),), directed=True), 0)


def test_orient_random_preserves_weights_and_pairs():
    g = G.gen_erdos_renyi(20, 0.4, weight_dist="uniform(0.2, 0.8)", seed=2)
    d = G.orient_random(g, seed=3)
    assert d.directed
    assert d.num_edges == g.num_edges
    undirected_pairs = {(i, j) for i, j, _ in g.edges}
    for i, j, w in d.edges:
        assert (min(i, j), max(i, j)) in undirected_pairs
    # Orientation is a coin flip per edge, so both directions should occur.
    flips = sum(1 for i, j, _ in d.edges if i > j)
    assert 0 < flips < d.num_edges


def test_bfs_distances_path_graph():
    # Path 0-1-2-3 plus isolated vertex 4: distances from 0 are 0,1,2,3,-1.
    g = G.WeightedDigraph(n=5, edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)))
    assert G.bfs_distances(g, 0).tolist() == [0, 1, 2, 3, -1]


def test_connected_components():
    g = G.WeightedDigraph(n=5, edges=((0, 1, 1.0), (2, 3, 1.0)))
    comps = G.connected_components(g)
    assert sorted(map(sorted, comps)) == [[0, 1], [2, 3], [4]]


def test_laplacian_to_csv_round_trip():
    g = G.WeightedDigraph(n=3, edges=((0, 1, 2.0), (1, 2, 0.5)))
    buf = io.StringIO()
    G.laplacian_to_csv(g, buf)
    arr = np.loadtxt(io.StringIO(buf.getvalue()), delimiter=",")
    assert np.allclose(arr, G.laplacian(g))


# ---------------------------------------------------------------------------
# Bundled graphs


def test_demo_graph_shape():
    g = datasets.demo_graph()
    assert g.n == 10
    assert g.directed
    assert g.num_edges == 64
    # Weights are stored rounded to 4 decimals; spot-check one diagonal entry.
    assert float(G.laplacian(g)[0, 0]) == pytest.approx(0.7944, abs=1e-12)


def test_karate_graph_statistics():
    # 34 members, 78 ties; mean degree 2*78/34 = 4.588..., max degree 17
    # (the instructor's hub), min degree 1.
    g = datasets.karate_graph()
    assert (g.n, g.num_edges, g.directed) == (34, 78, False)
    st = G.degree_stats(g)
    assert st.mean_degree == pytest.approx(156.0 / 34.0)
    assert (st.d_min, st.d_max) == (1.0, 17.0)
    assert len(G.connected_components(g)) == 1


def test_karate_cut_graph_splits_in_half():
    g = datasets.karate_cut_graph()
    assert g.n == 34
    assert g.num_edges == 67  # 78 minus the 11 cross-faction ties
    comps = G.connected_components(g)
    assert sorted(len(c) for c in comps) == [17, 17]
    # The cut removes exactly the edges listed by karate_cut_edges.
    full = {(i, j) for i, j, _ in datasets.karate_graph().edges}
    cut = {(i, j) for i, j, _ in g.edges}
    removed = {(min(i, j), max(i, j)) for i, j in datasets.karate_cut_edges()}
    assert full - cut == removed
