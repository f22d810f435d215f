"""Statistical spectral identification for large networks.

When n is large the measured eigenvalues of K form m dense clusters in the
complex plane rather than resolvable points. This module clusters them,
treats each cluster as a uniform distribution over its convex hull to
estimate the first two spectral moments of K, and inverts those into
Laplacian moments — with optional corrections for heterogeneous unit
populations and for random edge weights.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .dynamics import LinearUnit
from .graphs import MomentDegreeBounds

__all__ = [
    "EigenvalueCluster",
    "MomentEstimates",
    "MomentError",
    "cluster_eigenvalues",
    "clusters_to_csv",
    "hull_area_moments",
    "make_cluster",
    "moments_of_K",
    "matrix_moments",
    "laplacian_moment_recursion",
    "laplacian_moments_identical",
    "laplacian_moments_hetero",
    "laplacian_moments_hetero_unknown_A",
    "laplacian_moments_two_population",
    "unweighted_moments",
]

_CTB_TOL = 1e-12


class MomentError(RuntimeError):
    """Raised when moment inversion is impossible (vanishing C^T B)."""


# ---------------------------------------------------------------------------
# Convex hulls and polygon area moments


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull of an (N, 2) point set, counterclockwise.

    Collinear boundary points are dropped; fully collinear inputs yield just
    the two extreme points (a degenerate hull).
    """
    pts = np.unique(points, axis=0)
    if pts.shape[0] <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def build(ordered):
        chain: list = []
        for p in ordered:
            while len(chain) >= 2 and cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def hull_area_moments(points) -> tuple[float, float, float, float]:
    """Convex-hull area and axis moments of a planar point set.

    Returns:
        (A, I_x, I_xx, I_yy) where A is the hull area, I_x the area centroid's
        x-coordinate, I_xx = integral of y^2 dA, and I_yy = integral of x^2 dA
        (shoelace closed forms).

    Degenerate hulls (fewer than 3 vertices, or area negligible relative to
    the squared diameter) return A = 0, I_x = mean x of the points, and zero
    second moments; callers needing eigenvalue moments should use discrete
    averages in that case (see moments_of_K).
    """
    pts = _as_xy(points)
    hull = _convex_hull(pts)
    if hull.shape[0] < 3:
        return 0.0, float(pts[:, 0].mean()), 0.0, 0.0
    x, y = hull[:, 0], hull[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * float(cross.sum())
    diam2 = float(
        (pts[:, 0].max() - pts[:, 0].min()) ** 2
        + (pts[:, 1].max() - pts[:, 1].min()) ** 2
    )
    if area <= max(1e-12, 1e-9 * diam2):
        return 0.0, float(pts[:, 0].mean()), 0.0, 0.0
    ix = float(((x + xn) * cross).sum()) / (6.0 * area)
    iyy = float(((x * x + x * xn + xn * xn) * cross).sum()) / 12.0
    ixx = float(((y * y + y * yn + yn * yn) * cross).sum()) / 12.0
    return area, ix, ixx, iyy


def _as_xy(points) -> np.ndarray:
    arr = np.asarray(list(points))
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr.astype(float)
    arr = arr.reshape(-1).astype(complex)
    return np.column_stack([arr.real, arr.imag])


@dataclass(frozen=True)
class EigenvalueCluster:
    """A cluster of measured eigenvalues with its hull geometry.

    Fields:
        members: complex eigenvalues assigned to the cluster.
        hull: (h, 2) counterclockwise hull vertices in the (Re, Im) plane.
        area_moments: (A, I_x, I_xx, I_yy) of the hull.
        degenerate: True when the hull has (near-)zero area, in which case
            moment estimation falls back to discrete member averages.
    """

    members: tuple[complex, ...]
    hull: np.ndarray
    area_moments: tuple[float, float, float, float]
    degenerate: bool

    @property
    def centroid(self) -> complex:
        return complex(np.mean(np.asarray(self.members)))


def make_cluster(members, sliver_ratio: float = 0.01) -> EigenvalueCluster:
    """Build an EigenvalueCluster (hull + area moments) from eigenvalues.

    A cluster is marked degenerate when its hull area is below
    ``sliver_ratio`` times the squared hull diameter: a near-collinear
    sliver has no meaningful interior, and the uniform-over-hull moment
    model degrades into a range midpoint that one extreme member can
    swing. Such clusters take the discrete member-average fallback.
    """
    members = tuple(complex(z) for z in members)
    if not members:
        raise ValueError("cluster needs at least one member")
    pts = _as_xy(members)
    hull = _convex_hull(pts)
    moments = hull_area_moments(pts)
    diam2 = float(
        (pts[:, 0].max() - pts[:, 0].min()) ** 2
        + (pts[:, 1].max() - pts[:, 1].min()) ** 2
    )
    return EigenvalueCluster(
        members=members,
        hull=hull,
        area_moments=moments,
        degenerate=(moments[0] <= sliver_ratio * diam2),
    )


# ---------------------------------------------------------------------------
# k-means clustering


def _kmeans_once(pts: np.ndarray, k: int, rng: np.random.Generator):
    n = pts.shape[0]
    # k-means++ seeding.
    centers = np.empty((k, 2))
    centers[0] = pts[int(rng.integers(n))]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i] = pts[int(rng.integers(n))]
        else:
            centers[i] = pts[int(rng.choice(n, p=d2 / total))]
        d2 = np.minimum(d2, ((pts - centers[i]) ** 2).sum(axis=1))

    labels = np.zeros(n, dtype=int)
    for _ in range(200):
        dists = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        for i in range(k):
            mask = new_labels == i
            if mask.any():
                centers[i] = pts[mask].mean(axis=0)
            else:
                # Reseed an empty cluster with the farthest point.
                far = int(dists.min(axis=1).argmax())
                centers[i] = pts[far]
                new_labels[far] = i
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(((pts - centers[labels]) ** 2).sum())
    return labels, centers, inertia


def _kmeans(pts: np.ndarray, k: int, rng: np.random.Generator, restarts: int = 50):
    best = None
    for _ in range(restarts):
        labels, centers, inertia = _kmeans_once(pts, k, rng)
        if best is None or inertia < best[2] - 1e-15:
            best = (labels, centers, inertia)
    return best[0], best[1]


def cluster_eigenvalues(
    eigs,
    n_c: int,
    seed: int | np.random.Generator = 0,
    merge: bool = True,
    trim: bool = False,
    trim_factor: float = 3.0,
) -> list[EigenvalueCluster]:
    """Group measured eigenvalues into clusters in the complex plane.

    k-means on (Re, Im) with k-means++ seeding and 50 restarts (best inertia
    kept). Overlapping clusters — centroid distance below the mean of the two
    cluster radii — are merged, so fewer than n_c clusters can come back.
    With ``trim``, members farther than ``trim_factor`` times the median
    distance from their cluster centroid are discarded.

    Raises:
        ValueError: empty input, n_c < 1, or n_c exceeding the eigenvalue count.
    """
    eigs = np.asarray(list(eigs), dtype=complex)
    if eigs.size == 0:
        raise ValueError("no eigenvalues to cluster")
    if n_c < 1:
        raise ValueError("n_c must be >= 1")
    if n_c > eigs.size:
        raise ValueError(f"n_c={n_c} exceeds the number of eigenvalues ({eigs.size})")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pts = np.column_stack([eigs.real, eigs.imag])
    labels, _ = _kmeans(pts, n_c, rng)
    groups = [eigs[labels == i] for i in range(n_c) if np.any(labels == i)]

    if merge:
        groups = _merge_overlapping(groups)
    if trim:
        groups = [_trim_members(g, trim_factor) for g in groups]

    groups.sort(key=lambda g: (float(np.mean(g.real)), float(np.mean(g.imag))))
    return [make_cluster(g) for g in groups]


def _merge_overlapping(groups: list[np.ndarray]) -> list[np.ndarray]:
    def radius(g):
        c = g.mean()
        return float(np.mean(np.abs(g - c))) if g.size > 1 else 0.0

    merged = True
    while merged and len(groups) > 1:
        merged = False
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                dist = abs(groups[a].mean() - groups[b].mean())
                if dist <= 0.5 * (radius(groups[a]) + radius(groups[b])):
                    groups = (
                        [g for i, g in enumerate(groups) if i not in (a, b)]
                        + [np.concatenate([groups[a], groups[b]])]
                    )
                    merged = True
                    break
            if merged:
                break
    return groups


def _trim_members(group: np.ndarray, factor: float) -> np.ndarray:
    if group.size <= 2:
        return group
    center = group.mean()
    dist = np.abs(group - center)
    cutoff = factor * float(np.median(dist))
    keep = dist <= max(cutoff, 1e-300)
    return group[keep] if keep.any() else group


def clusters_to_csv(
    clusters: Sequence[EigenvalueCluster], target: Union[str, Path, io.TextIOBase]
) -> None:
    """Write cluster members and hull vertices as CSV rows
    (cluster, kind, re, im) for external plotting."""
    rows = []
    for cid, cluster in enumerate(clusters):
        for z in cluster.members:
            rows.append([float(cid), 0.0, z.real, z.imag])
        for vx, vy in cluster.hull:
            rows.append([float(cid), 1.0, float(vx), float(vy)])
    header = "cluster,kind_0member_1hull,re,im"
    np.savetxt(target, np.array(rows), delimiter=",", header=header, comments="# ")


# ---------------------------------------------------------------------------
# Moments of K from clusters


def moments_of_K(
    clusters: Sequence[EigenvalueCluster], discrete: bool = False
) -> tuple[float, float]:
    """First two spectral moments of K from eigenvalue clusters.

    Each cluster is treated as a uniform distribution over its convex hull:
    the first moment is the centroid x-coordinate and the second is
    (I_yy - I_xx)/A — the real part of E[z^2] for z uniform on the hull,
    which is exact for conjugate-symmetric spectra. Degenerate clusters
    (near-zero hull area) contribute discrete averages of Re(mu) and
    Re(mu^2) instead.

    With ``discrete=True`` every cluster takes the member-average path.
    The uniform-hull model integrates the region spanned by the measured
    values, so a single extreme member reshapes the whole estimate; the
    member average is the lower-variance choice unless the measured values
    genuinely fill the hull.
    """
    if not clusters:
        raise ValueError("need at least one cluster")
    m1 = 0.0
    m2 = 0.0
    for cluster in clusters:
        area, ix, ixx, iyy = cluster.area_moments
        if discrete or cluster.degenerate:
            mu = np.asarray(cluster.members)
            m1 += float(np.mean(mu.real))
            m2 += float(np.mean((mu**2).real))
        else:
            m1 += ix
            m2 += (iyy - ixx) / area
    n_c = len(clusters)
    return m1 / n_c, m2 / n_c


def matrix_moments(M: np.ndarray, k_max: int) -> list[float]:
    """Exact moments tr(M^k)/dim for k = 0..k_max via accumulated powers."""
    M = np.asarray(M, dtype=float)
    dim = M.shape[0]
    out = [1.0]
    power = np.eye(dim)
    for _ in range(k_max):
        power = power @ M
        out.append(float(np.trace(power)) / dim)
    return out


# ---------------------------------------------------------------------------
# Laplacian moment inversion


def _ctb(unit: LinearUnit) -> float:
    value = float(unit.C @ unit.B)
    if abs(value) <= _CTB_TOL:
        raise MomentError("C^T B vanishes; Laplacian moments are unrecoverable")
    return value


def laplacian_moment_recursion(MK: Sequence[float], unit: LinearUnit, k: int) -> float:
    """Exact k-th Laplacian moment from moments of K.

    Expanding tr(K^k) for K = I_n (x) A - L (x) B C^T over all operator words
    gives

        m * M_k(K) = sum_{j=0}^{k} (-1)^j M_j(L) * T_j^(k),

    where T_j^(k) is the trace of the z^j coefficient of (A + z B C^T)^k.
    The coefficients are accumulated as matrix polynomials (no commutativity
    assumptions), and the j = k term T_k^(k) = (C^T B)^k is solved for
    M_k(L) using the lower-order Laplacian moments recursively.

    Args:
        MK: moments of K for orders 1..k (MK[0] = M_1(K)).
        k: target order, k >= 1.

    Raises:
        MomentError: C^T B = 0 (within 1e-12).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(MK) < k:
        raise ValueError(f"MK must provide orders 1..{k}")
    ctb = _ctb(unit)
    m = unit.m
    BCt = np.outer(unit.B, unit.C)
    ML = [1.0]
    coefs = [np.eye(m)]
    for kk in range(1, k + 1):
        new = []
        for j in range(kk + 1):
            mat = np.zeros((m, m))
            if j <= kk - 1:
                mat = mat + coefs[j] @ unit.A
            if j >= 1:
                mat = mat + coefs[j - 1] @ BCt
            new.append(mat)
        coefs = new
        traces = [float(np.trace(cj)) for cj in coefs]
        acc = m * float(MK[kk - 1])
        for j in range(kk):
            acc -= (-1.0) ** j * ML[j] * traces[j]
        ML.append((-1.0) ** kk * acc / ctb**kk)
    return ML[k]


def laplacian_moments_identical(
    M1K: float, M2K: float, unit: LinearUnit
) -> tuple[float, float]:
    """First two Laplacian moments for identical units.

    M1L = (-m M1K + tr A) / (C^T B)
    M2L = (m M2K - tr A^2 + 2 M1L tr(A B C^T)) / (C^T B)^2
    """
    ctb = _ctb(unit)
    A = unit.A
    m = unit.m
    m1l = (-m * M1K + float(np.trace(A))) / ctb
    m2l = (
        m * M2K - float(np.trace(A @ A)) + 2.0 * m1l * float(unit.C @ A @ unit.B)
    ) / ctb**2
    return m1l, m2l


def laplacian_moments_hetero(
    M1KdK: float, M2KdK: float, unit: LinearUnit, s: float
) -> tuple[float, float]:
    """Moment inversion under i.i.d. per-unit perturbations of known variance.

    The measured moments belong to K + dK with dK block-diagonal, each block
    entry independent with zero mean and standard deviation s. The first
    moment is unchanged in expectation; the second needs the m s^2 bias
    subtracted:

        M1L_hat = (-m M1(K+dK) + tr A) / (C^T B)
        M2L_hat = (m M2(K+dK) - m s^2 - tr A^2 + 2 M1L_hat tr(A B C^T)) / (C^T B)^2
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    ctb = _ctb(unit)
    A = unit.A
    m = unit.m
    m1l = (-m * M1KdK + float(np.trace(A))) / ctb
    m2l = (
        m * M2KdK
        - m * s**2
        - float(np.trace(A @ A))
        + 2.0 * m1l * float(unit.C @ A @ unit.B)
    ) / ctb**2
    return m1l, m2l


def laplacian_moments_hetero_unknown_A(
    M1KdK: float, M2KdK: float, A_measured: np.ndarray, B: np.ndarray, C: np.ndarray
) -> tuple[float, float]:
    """Moment inversion when only one perturbed unit's dynamics was measured.

    ``A_measured`` = A + dA for a single (unknown) perturbation draw. Its
    traces replace the exact ones: since E[tr((A+dA)^2)] = tr(A^2) + m s^2,
    the perturbation variance cancels on average and never needs to be known.
    """
    A_measured = np.atleast_2d(np.asarray(A_measured, dtype=float))
    B = np.asarray(B, dtype=float).reshape(-1)
    C = np.asarray(C, dtype=float).reshape(-1)
    m = A_measured.shape[0]
    ctb = float(C @ B)
    if abs(ctb) <= _CTB_TOL:
        raise MomentError("C^T B vanishes; Laplacian moments are unrecoverable")
    m1l = (-m * M1KdK + float(np.trace(A_measured))) / ctb
    m2l = (
        m * M2KdK
        - float(np.trace(A_measured @ A_measured))
        + 2.0 * m1l * float(C @ A_measured @ B)
    ) / ctb**2
    return m1l, m2l


def laplacian_moments_two_population(
    M1KdK: float,
    M2KdK: float,
    unit: LinearUnit,
    deltaA: np.ndarray,
    s: float = 1.0,
) -> tuple[float, float]:
    """Moment inversion for units split between two dynamics A + dA and A - dA
    (signs drawn equiprobably, so the sign variance is s^2 = 1).

        M1L_hat = (-m M1(K+dK) + tr A) / (C^T B)
        M2L_hat = (m M2(K+dK) - s^2 tr(dA^2)/m - tr A^2
                   + 2 M1L_hat tr(A B C^T)) / (C^T B)^2
    """
    ctb = _ctb(unit)
    deltaA = np.atleast_2d(np.asarray(deltaA, dtype=float))
    A = unit.A
    m = unit.m
    if deltaA.shape != (m, m):
        raise ValueError(f"deltaA must have shape {(m, m)}")
    m1l = (-m * M1KdK + float(np.trace(A))) / ctb
    m2l = (
        m * M2KdK
        - s**2 * float(np.trace(deltaA @ deltaA)) / m
        - float(np.trace(A @ A))
        + 2.0 * m1l * float(unit.C @ A @ unit.B)
    ) / ctb**2
    return m1l, m2l


def unweighted_moments(
    M1L: float, M2L: float, r_w: float, s_w: float
) -> tuple[float, float]:
    """Moments of the unweighted Laplacian from weighted-Laplacian moments.

    For i.i.d. edge weights with mean r_w and std s_w:

        M1(Lbar) = M1L / r_w
        M2(Lbar) = M2L / r_w^2 - s_w^2 M1L / r_w^3

    Raises:
        ValueError: r_w <= 0.
    """
    if r_w <= 0:
        raise ValueError("weight mean r_w must be positive")
    if s_w < 0:
        raise ValueError("weight std s_w must be >= 0")
    return M1L / r_w, M2L / r_w**2 - s_w**2 * M1L / r_w**3


@dataclass(frozen=True)
class MomentEstimates:
    """Assembled moment-pipeline outputs.

    ``variant`` records which inversion was applied: identical,
    hetero_known_A, hetero_unknown_A, or two_population. The unweighted
    moments and the degree report are present only when the corresponding
    corrections were configured.
    """

    M1K: float
    M2K: float
    M1L: float
    M2L: float
    variant: str
    M1L_unweighted: Optional[float] = None
    M2L_unweighted: Optional[float] = None
    degree: Optional[MomentDegreeBounds] = None

    def to_dict(self) -> dict:
        out = {
            "M1K": self.M1K,
            "M2K": self.M2K,
            "M1L": self.M1L,
            "M2L": self.M2L,
            "variant": self.variant,
        }
        if self.M1L_unweighted is not None:
            out["M1L_unweighted"] = self.M1L_unweighted
            out["M2L_unweighted"] = self.M2L_unweighted
        if self.degree is not None:
            out["degree"] = {
                "mean_degree": self.degree.mean_degree,
                "quad_low": self.degree.quad_low,
                "quad_high": self.degree.quad_high,
                "consistent": self.degree.consistent,
            }
        return out
