"""Weighted directed graphs: Laplacians, degree statistics, exact spectral
moments, random generators, and edge-list file I/O.

Graphs are immutable. Vertex indices are 0-based everywhere, including the
edge-list file format. For directed graphs the degree convention is the
out-degree d_i = sum_k w(i, k), so Laplacian row sums are zero.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

from .distributions import Distribution, parse_distribution

__all__ = [
    "WeightedDigraph",
    "DegreeStats",
    "SpectralMomentSet",
    "MomentDegreeBounds",
    "GraphGenerationError",
    "laplacian",
    "weight_matrix",
    "degree_stats",
    "exact_spectral_moments",
    "gen_erdos_renyi",
    "gen_degree_sequence",
    "load_edge_list",
    "write_edge_list",
    "unweight",
    "relabel",
    "remove_edges",
    "add_pendant_vertex",
    "orient_random",
    "bfs_distances",
    "connected_components",
    "degree_bounds_from_spectrum",
    "degree_stats_from_moments",
    "laplacian_to_csv",
]


class GraphGenerationError(RuntimeError):
    """Raised when a random-graph construction cannot be completed."""


@dataclass(frozen=True)
class WeightedDigraph:
    """Immutable weighted graph without self-loops.

    Fields:
        n: vertex count.
        edges: tuple of (i, j, weight) with 0 <= i, j < n, i != j, weight > 0.
            For undirected graphs each edge is stored once with i < j and
            represents weight in both directions.
        directed: whether edges are one-way.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    directed: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        seen: set[tuple[int, int]] = set()
        normalized = []
        for i, j, w in self.edges:
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if i == j:
                raise ValueError(f"self-loop at vertex {i} is not allowed")
            if w <= 0:
                raise ValueError(f"edge ({i}, {j}) has nonpositive weight {w}")
            if not self.directed and i > j:
                i, j = j, i
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            normalized.append((i, j, w))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class DegreeStats:
    """Exact degree statistics of a graph (out-degrees for directed)."""

    d_min: float
    d_max: float
    mean_degree: float
    quad_mean_degree: float


@dataclass(frozen=True)
class SpectralMomentSet:
    """Spectral moments M_k = (1/n) tr(L^k) for k = 0..k_max (M_0 = 1)."""

    moments: tuple[float, ...]

    @property
    def k_max(self) -> int:
        return len(self.moments) - 1

    def __getitem__(self, k: int) -> float:
        return self.moments[k]


@dataclass(frozen=True)
class MomentDegreeBounds:
    """Degree statistics derivable from the first two spectral moments.

    The mean degree is determined exactly; the quadratic mean degree is only
    bracketed. When the supplied moments violate M2 >= M1^2 >= 0 the interval
    is clamped to be nonempty and ``consistent`` is set False.
    """

    mean_degree: float
    quad_low: float
    quad_high: float
    consistent: bool


def weight_matrix(g: WeightedDigraph) -> np.ndarray:
    """Dense weight matrix W with W[i, j] = w(i, j)."""
    W = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        W[i, j] = w
        if not g.directed:
            W[j, i] = w
    return W


def laplacian(g: WeightedDigraph) -> np.ndarray:
    """Laplacian L = D - W where D is the diagonal of row sums of W."""
    W = weight_matrix(g)
    return np.diag(W.sum(axis=1)) - W


def degree_stats(g: WeightedDigraph) -> DegreeStats:
    degrees = weight_matrix(g).sum(axis=1)
    return DegreeStats(
        d_min=float(degrees.min()),
        d_max=float(degrees.max()),
        mean_degree=float(degrees.mean()),
        quad_mean_degree=float((degrees**2).mean()),
    )


def exact_spectral_moments(g: WeightedDigraph, k_max: int) -> SpectralMomentSet:
    """Exact moments M_k(L) = (1/n) tr(L^k) via matrix powers.

    Powers are accumulated explicitly (no eigendecomposition), so the result
    is exact for defective Laplacians too.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    L = laplacian(g)
    moments = [1.0]
    power = np.eye(g.n)
    for _ in range(k_max):
        power = power @ L
        moments.append(float(np.trace(power)) / g.n)
    return SpectralMomentSet(tuple(moments))


def _draw_weight(dist: Distribution | None, rng: np.random.Generator) -> float:
    if dist is None:
        return 1.0
    w = float(dist.sample(rng))
    if w <= 0:
        raise GraphGenerationError(
            f"weight distribution produced nonpositive weight {w}; "
            "weights must be strictly positive"
        )
    return w


def gen_erdos_renyi(
    n: int,
    p_edge: float,
    weight_dist=None,
    directed: bool = False,
    seed: int | np.random.Generator = 0,
) -> WeightedDigraph:
    """Erdos-Renyi random graph: each vertex pair is connected independently
    with probability ``p_edge``.

    Args:
        n: vertex count.
        p_edge: connection probability in [0, 1].
        weight_dist: optional distribution spec for edge weights
            (default: all weights 1).
        directed: sample each ordered pair independently when True.
        seed: integer seed or a Generator.
    """
    if not 0.0 <= p_edge <= 1.0:
        raise ValueError("p_edge must be in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dist = parse_distribution(weight_dist) if weight_dist is not None else None
    edges = []
    for i in range(n):
        others = range(n) if directed else range(i + 1, n)
        for j in others:
            if i == j:
                continue
            if rng.random() < p_edge:
                edges.append((i, j, _draw_weight(dist, rng)))
    return WeightedDigraph(n=n, edges=tuple(edges), directed=directed)


def gen_degree_sequence(
    n: int,
    degree_dist,
    weight_dist=None,
    seed: int | np.random.Generator = 0,
) -> WeightedDigraph:
    """Undirected random graph whose degree sequence approximates i.i.d.
    draws from ``degree_dist`` (configuration-model stub matching).

    Degrees are rounded and clamped to [0, n-1]; the sequence's parity is
    fixed by bumping one vertex. Stubs are paired by a uniform shuffle, and
    pairs producing self-loops or duplicate edges are repaired by rewiring
    against randomly chosen pairs (committing only collision-free rewires).
    Clamping can leave a drawn sequence unrealizable as a simple graph (e.g.
    a vertex demanding more neighbors than there are vertices of nonzero
    degree), so pairs still colliding when the bounded repair stalls are
    dropped and the realized degrees undershoot the drawn sequence slightly.
    The construction fails only when more than a quarter of the stub pairs
    would have to be dropped, which signals a distribution that is
    structurally unrealizable rather than merely unlucky.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dist = parse_distribution(degree_dist)
    wdist = parse_distribution(weight_dist) if weight_dist is not None else None

    raw = np.asarray(dist.sample(rng, n), dtype=float)
    degrees = np.clip(np.rint(raw), 0, n - 1).astype(int)
    if degrees.sum() % 2 == 1:
        k = int(rng.integers(n))
        degrees[k] += 1 if degrees[k] < n - 1 else -1

    all_stubs = np.repeat(np.arange(n), degrees)
    total_pairs = len(all_stubs) // 2
    best_pairs: list[tuple[int, int]] | None = None
    best_drop = total_pairs + 1
    for _restart in range(3):
        pairs, dropped = _match_stubs(all_stubs, n, rng)
        if dropped < best_drop:
            best_pairs, best_drop = pairs, dropped
        if dropped == 0:
            break
    if best_pairs is None or 4 * best_drop > total_pairs:
        raise GraphGenerationError(
            f"degree sequence unrealizable: {best_drop} of {total_pairs} "
            "stub pairs could not be placed"
        )
    edges = tuple(
        (i, j, _draw_weight(wdist, rng)) for i, j in best_pairs
    )
    return WeightedDigraph(n=n, edges=edges, directed=False)


def _match_stubs(
    all_stubs: np.ndarray, n: int, rng: np.random.Generator
) -> tuple[list[tuple[int, int]], int]:
    """One shuffle-and-repair pass of configuration-model stub matching.

    Pairs the shuffled stubs, then rewires self-loops and duplicate edges
    against randomly chosen partner pairs, committing a rewire only when
    both replacement pairs are collision-free. When the sweeps stop making
    headway the residual colliding pairs are dropped. Returns the sorted
    valid edge pairs and the number of dropped pairs.
    """
    stubs = all_stubs.copy()
    rng.shuffle(stubs)
    left, right = stubs[0::2].copy(), stubs[1::2].copy()
    npairs = len(left)
    best_bad = npairs + 1
    stalled = 0
    for _sweep in range(150):
        lo = np.minimum(left, right)
        hi = np.maximum(left, right)
        key = lo * n + hi
        order = np.argsort(key, kind="stable")
        dup = np.zeros(npairs, dtype=bool)
        dup[order[1:]] = key[order[1:]] == key[order[:-1]]
        bad = np.flatnonzero((left == right) | dup)
        if bad.size == 0:
            return sorted(zip(lo.tolist(), hi.tolist())), 0
        if bad.size < best_bad:
            best_bad, stalled = bad.size, 0
        else:
            stalled += 1
            if stalled > 20 or npairs < 2:
                break
        used = set(key.tolist())
        progress = False
        for b in bad:
            u, v = int(left[b]), int(right[b])
            for _try in range(8):
                p = int(rng.integers(npairs))
                if p == b:
                    continue
                x, y = int(left[p]), int(right[p])
                if u == y or x == v:
                    continue
                k1 = min(u, y) * n + max(u, y)
                k2 = min(x, v) * n + max(x, v)
                if k1 == k2 or k1 in used or k2 in used:
                    continue
                right[b], right[p] = y, v
                used.add(k1)
                used.add(k2)
                progress = True
                break
        if not progress and npairs >= 2:
            # Plateau: shake the stuck pairs with unconditional swaps and
            # let the next sweep re-detect collisions.
            kicks = rng.integers(npairs, size=bad.size)
            for b, p in zip(bad, kicks):
                right[b], right[p] = right[p], right[b]
    # Stalled: drop whatever still collides.
    lo = np.minimum(left, right)
    hi = np.maximum(left, right)
    key = lo * n + hi
    order = np.argsort(key, kind="stable")
    dup = np.zeros(npairs, dtype=bool)
    dup[order[1:]] = key[order[1:]] == key[order[:-1]]
    bad = (left == right) | dup
    good = ~bad
    pairs = sorted(zip(lo[good].tolist(), hi[good].tolist()))
    return pairs, int(bad.sum())


def load_edge_list(
    source: Union[str, Path, TextIO],
    directed: bool = False,
    n: int | None = None,
) -> WeightedDigraph:
    """Parse a whitespace-separated edge-list file.

    Format: one edge per line, ``i j [w]`` with 0-based vertex indices and an
    optional positive weight (default 1.0). ``#`` starts a comment; blank
    lines are skipped. The vertex count is max index + 1 unless ``n`` is
    given.

    For undirected graphs (the default) each line contributes a symmetric
    edge; a repeated pair is merged when the weights agree and is an error
    otherwise, so files listing both directions parse cleanly.

    Raises:
        ValueError: malformed line, self-loop, nonpositive weight, index out
            of range, or conflicting duplicate weights (with line numbers).
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_edge_list(fh, directed=directed, n=n)

    entries: dict[tuple[int, int], tuple[float, int]] = {}
    max_index = -1
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 'i j [w]', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if i == j:
            raise ValueError(f"line {lineno}: self-loop at vertex {i}")
        if i < 0 or j < 0:
            raise ValueError(f"line {lineno}: negative vertex index")
        if w <= 0:
            raise ValueError(f"line {lineno}: nonpositive weight {w}")
        key = (i, j) if directed else (min(i, j), max(i, j))
        if key in entries:
            prev_w, prev_line = entries[key]
            if prev_w != w:
                raise ValueError(
                    f"line {lineno}: edge {key} repeats line {prev_line} "
                    f"with a different weight ({w} vs {prev_w})"
                )
        else:
            entries[key] = (w, lineno)
        max_index = max(max_index, i, j)

    count = (max_index + 1) if n is None else n
    if n is not None and max_index >= n:
        raise ValueError(f"edge list references vertex {max_index} but n={n}")
    edges = tuple((i, j, w) for (i, j), (w, _) in sorted(entries.items()))
    return WeightedDigraph(n=count, edges=edges, directed=directed)


def write_edge_list(g: WeightedDigraph, target: Union[str, Path, TextIO]) -> None:
    """Write a graph in the edge-list format accepted by load_edge_list."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            write_edge_list(g, fh)
            return
    target.write(f"# n={g.n} directed={int(g.directed)}\n")
    for i, j, w in g.edges:
        target.write(f"{i} {j} {w:.12g}\n")


def unweight(g: WeightedDigraph) -> WeightedDigraph:
    """Same edge set with every weight set to 1."""
    return WeightedDigraph(
        n=g.n,
        edges=tuple((i, j, 1.0) for i, j, _ in g.edges),
        directed=g.directed,
    )


def relabel(g: WeightedDigraph, perm: Sequence[int]) -> WeightedDigraph:
    """Relabel vertices: vertex i becomes perm[i] (perm must be a permutation)."""
    if sorted(perm) != list(range(g.n)):
        raise ValueError("perm must be a permutation of 0..n-1")
    edges = tuple((perm[i], perm[j], w) for i, j, w in g.edges)
    return WeightedDigraph(n=g.n, edges=edges, directed=g.directed)


def remove_edges(
    g: WeightedDigraph, pairs: Iterable[tuple[int, int]]
) -> WeightedDigraph:
    """Remove the listed edges (unordered pairs for undirected graphs).

    Raises:
        ValueError: if a listed edge is not present.
    """
    drop = set()
    for i, j in pairs:
        drop.add((i, j) if g.directed else (min(i, j), max(i, j)))
    present = {(i, j) for i, j, _ in g.edges}
    missing = drop - present
    if missing:
        raise ValueError(f"edges not in graph: {sorted(missing)}")
    edges = tuple(e for e in g.edges if (e[0], e[1]) not in drop)
    return WeightedDigraph(n=g.n, edges=edges, directed=g.directed)


def add_pendant_vertex(
    g: WeightedDigraph, attach_to: int, weight: float = 1.0
) -> WeightedDigraph:
    """Add one new vertex connected to ``attach_to`` by a single edge.

    The new vertex gets index n. Only defined for undirected graphs.
    """
    if g.directed:
        raise ValueError("pendant addition is defined for undirected graphs")
    if not 0 <= attach_to < g.n:
        raise ValueError(f"attach_to {attach_to} out of range")
    edges = g.edges + ((attach_to, g.n, float(weight)),)
    return WeightedDigraph(n=g.n + 1, edges=edges, directed=False)


def orient_random(
    g: WeightedDigraph, seed: int | np.random.Generator = 0
) -> WeightedDigraph:
    """Make an undirected graph directed by flipping a fair coin per edge."""
    if g.directed:
        raise ValueError("graph is already directed")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    edges = []
    for i, j, w in g.edges:
        if rng.random() < 0.5:
            edges.append((i, j, w))
        else:
            edges.append((j, i, w))
    return WeightedDigraph(n=g.n, edges=tuple(edges), directed=True)


def _adjacency_sets(g: WeightedDigraph) -> list[set[int]]:
    # Symmetrized adjacency: distances and components ignore edge direction.
    adj: list[set[int]] = [set() for _ in range(g.n)]
    for i, j, _ in g.edges:
        adj[i].add(j)
        adj[j].add(i)
    return adj


def bfs_distances(g: WeightedDigraph, source: int) -> np.ndarray:
    """Unweighted shortest-path distances from ``source`` (ignoring edge
    direction); unreachable vertices get -1."""
    adj = _adjacency_sets(g)
    dist = np.full(g.n, -1, dtype=int)
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if dist[u] < 0:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


def connected_components(g: WeightedDigraph) -> list[list[int]]:
    """Connected components (weak components for directed graphs)."""
    comps = []
    unseen = set(range(g.n))
    while unseen:
        start = min(unseen)
        dist = bfs_distances(g, start)
        comp = sorted(v for v in unseen if dist[v] >= 0)
        comps.append(comp)
        unseen -= set(comp)
    return comps


def degree_bounds_from_spectrum(
    lambda2: float, lambda_n: float, n: int
) -> tuple[float, float]:
    """Degree bounds implied by the extreme Laplacian eigenvalues of an
    undirected graph: d_min >= (n-1)/n * lambda_2 and
    d_max <= (n-1)/n * lambda_n.

    Returns:
        (lower bound on d_min, upper bound on d_max).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    scale = (n - 1) / n
    return scale * lambda2, scale * lambda_n


def degree_stats_from_moments(m1: float, m2: float) -> MomentDegreeBounds:
    """Degree statistics from the first two Laplacian spectral moments.

    The mean degree equals M1 exactly; the quadratic mean degree lies in
    [max(M1^2, M2/2), M2]. Estimated moments can violate M2 >= M1^2; the
    interval is then clamped to the point M2 and flagged inconsistent rather
    than raising, since that is a legitimate outcome of noisy estimation.
    """
    low = max(m1 * m1, m2 / 2.0)
    high = m2
    consistent = low <= high and m2 >= 0
    if not consistent:
        low = high
    return MomentDegreeBounds(
        mean_degree=m1, quad_low=low, quad_high=high, consistent=consistent
    )


def laplacian_to_csv(g: WeightedDigraph, target: Union[str, Path, TextIO]) -> None:
    """Write the Laplacian as plain CSV (one row per line)."""
    L = laplacian(g)
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            laplacian_to_csv(g, fh)
            return
    buf = io.StringIO()
    np.savetxt(buf, L, delimiter=",", fmt="%.12g")
    target.write(buf.getvalue())
