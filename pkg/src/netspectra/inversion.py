"""Exact spectral identification for networks of identical linear units.

Each eigenvalue mu of the network Jacobian K maps back to a Laplacian
eigenvalue through

    g(mu) = 1 / (C^T (A - mu I)^{-1} B),   g(mu) = 0 for mu in sigma(A),

and every Laplacian eigenvalue lambda receives exactly m such mu's. The
recovery pipeline applies g to each measured eigenvalue, weights the results
by the inverse squared sensitivity |g'(mu)|^2, and aggregates nearby values
into groups of at most m members.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .dynamics import LinearUnit

__all__ = [
    "RawRecovered",
    "SpectrumGroup",
    "RecoveredSpectrum",
    "ResolventError",
    "g_map",
    "sensitivity",
    "check_ctrb_obsv",
    "recover_spectrum",
]

_SIGMA_A_TOL = 1e-6
_RANK_TOL = 1e-10


class ResolventError(RuntimeError):
    """Raised when the resolvent observation C^T (A - mu I)^{-1} B degenerates
    (vanishes exactly or is evaluated at an eigenvalue of A)."""


def g_map(
    mu: complex, unit: LinearUnit, sigmaA_tol: float = _SIGMA_A_TOL
) -> complex:
    """Map an eigenvalue of K to its Laplacian eigenvalue.

    Returns 0 when mu lies within ``sigmaA_tol`` of sigma(A) (those mu's
    belong to the Laplacian zero eigenvalue's block), otherwise
    1 / (C^T (A - mu I)^{-1} B).

    Raises:
        ResolventError: the resolvent observation C^T x vanishes exactly,
            which makes lambda unrecoverable from this mu.
    """
    mu = complex(mu)
    if _distance_to_spectrum(mu, unit) <= sigmaA_tol:
        return 0.0 + 0.0j
    m = unit.m
    x = np.linalg.solve(unit.A - mu * np.eye(m), unit.B.astype(complex))
    ctx = complex(unit.C @ x)
    if ctx == 0:
        raise ResolventError(
            f"resolvent observation vanishes at mu={mu}; eigenvalue not recoverable"
        )
    return 1.0 / ctx


def sensitivity(mu: complex, unit: LinearUnit) -> complex:
    """Derivative g'(mu): first-order error amplification from mu to lambda.

    Delta(mu) = -C^T (A - mu I)^{-2} B / (C^T (A - mu I)^{-1} B)^2. A large
    |Delta| means a small error in mu induces a large error in the recovered
    lambda, so such values get small aggregation weights.

    Raises:
        ResolventError: mu is (numerically) an eigenvalue of A, or the
            resolvent observation vanishes.
    """
    mu = complex(mu)
    m = unit.m
    shifted = unit.A - mu * np.eye(m)
    try:
        x = np.linalg.solve(shifted, unit.B.astype(complex))
        y = np.linalg.solve(shifted, x)
    except np.linalg.LinAlgError as exc:
        raise ResolventError(f"resolvent singular at mu={mu}") from exc
    ctx = complex(unit.C @ x)
    if ctx == 0:
        raise ResolventError(f"resolvent observation vanishes at mu={mu}")
    return -complex(unit.C @ y) / ctx**2


def check_ctrb_obsv(unit: LinearUnit) -> tuple[bool, bool]:
    """Kalman rank tests for (A, B) controllability and (A, C) observability.

    Ranks are numerical (SVD, tolerance 1e-10 * sigma_max).
    """
    m = unit.m
    ctrb = _krylov(unit.A, unit.B.reshape(-1, 1))
    obsv = _krylov(unit.A.T, unit.C.reshape(-1, 1))
    return _numrank(ctrb) == m, _numrank(obsv) == m


def _krylov(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    blocks = [v]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def _numrank(M: np.ndarray) -> int:
    svals = np.linalg.svd(M, compute_uv=False)
    if svals.size == 0 or svals[0] == 0:
        return 0
    return int(np.sum(svals > _RANK_TOL * svals[0]))


def _distance_to_spectrum(mu: complex, unit: LinearUnit) -> float:
    return float(np.min(np.abs(np.linalg.eigvals(unit.A) - mu)))


@dataclass(frozen=True)
class RawRecovered:
    """One measured eigenvalue and its mapped value.

    ``degenerate`` marks entries whose resolvent observation vanished;
    their lam/sensitivity are NaN and they are excluded from aggregation.
    """

    mu: complex
    lam: complex
    sensitivity: complex
    degenerate: bool = False

    @property
    def weight(self) -> float:
        if self.degenerate:
            return 0.0
        mag = abs(self.sensitivity)
        if mag == 0 or not np.isfinite(mag):
            return 0.0
        return 1.0 / mag**2


@dataclass(frozen=True)
class SpectrumGroup:
    """An aggregated Laplacian eigenvalue and the raw indices behind it."""

    value: complex
    members: tuple[int, ...]


@dataclass(frozen=True)
class RecoveredSpectrum:
    """Result of mapping measured eigenvalues back to the Laplacian spectrum."""

    raw: tuple[RawRecovered, ...]
    aggregated: tuple[SpectrumGroup, ...]
    group_tol: float

    @property
    def eigenvalues(self) -> np.ndarray:
        """Aggregated Laplacian eigenvalues sorted by (Re, Im)."""
        vals = np.array([g.value for g in self.aggregated], dtype=complex)
        order = np.lexsort((vals.imag, vals.real))
        return vals[order]

    def to_csv(self, target: Union[str, Path, io.TextIOBase]) -> None:
        """Write per-measurement rows: Re/Im of lambda, weight, group id."""
        group_of = {}
        for gid, group in enumerate(self.aggregated):
            for idx in group.members:
                group_of[idx] = gid
        rows = []
        for idx, entry in enumerate(self.raw):
            rows.append(
                [
                    entry.lam.real,
                    entry.lam.imag,
                    entry.weight,
                    float(group_of.get(idx, -1)),
                ]
            )
        header = "re_lambda,im_lambda,weight,group_id"
        np.savetxt(target, np.array(rows), delimiter=",", header=header, comments="# ")


def _default_group_tol(lams: np.ndarray) -> float:
    if lams.size == 0:
        return 0.0
    spread = float(
        np.hypot(
            lams.real.max() - lams.real.min(), lams.imag.max() - lams.imag.min()
        )
    )
    return 1e-2 * spread


def _greedy_groups(lams: np.ndarray, indices: list[int], tol: float, cap: int):
    """Agglomerate values into groups: repeatedly merge the closest pair of
    groups (by centroid distance) while the distance is within tol and the
    merged size stays within cap."""
    groups = [[i] for i in range(len(indices))]
    centroids = [lams[i] for i in range(len(indices))]
    while len(groups) > 1:
        best = None
        best_d = np.inf
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                if len(groups[a]) + len(groups[b]) > cap:
                    continue
                d = abs(centroids[a] - centroids[b])
                if d < best_d:
                    best_d, best = d, (a, b)
        if best is None or best_d > tol:
            break
        a, b = best
        merged = groups[a] + groups[b]
        centroid = complex(np.mean([lams[i] for i in merged]))
        groups = [g for k, g in enumerate(groups) if k not in (a, b)] + [merged]
        centroids = [c for k, c in enumerate(centroids) if k not in (a, b)] + [centroid]
    return [[indices[i] for i in g] for g in groups]


def recover_spectrum(
    mu_list,
    unit: LinearUnit,
    group_tol: Optional[float] = None,
    undirected: bool = False,
    sigmaA_tol: float = _SIGMA_A_TOL,
) -> RecoveredSpectrum:
    """Recover the Laplacian spectrum from measured eigenvalues of K.

    Applies g to each mu, groups the mapped values by greedy agglomeration
    (centroid distance within ``group_tol``, at most m members per group
    since each Laplacian eigenvalue contributes exactly m mu's), and
    aggregates each group with inverse-squared-sensitivity weights:

        lambda_bar = sum(lam_k / |Delta_k|^2) / sum(1 / |Delta_k|^2)

    Args:
        group_tol: grouping radius; defaults to 1e-2 times the spread
            (bounding-box diagonal) of the mapped values.
        undirected: project aggregated values with |Im| <= group_tol onto the
            real axis; larger imaginary parts are kept and warned about.

    Notes:
        Degenerate resolvent observations flag their entry rather than
        aborting. mu's within ``sigmaA_tol`` of sigma(A) map to 0 exactly and
        carry infinite sensitivity markers (zero weight): a group of such
        entries aggregates to the plain mean of its mapped values.
    """
    ctrb, obsv = check_ctrb_obsv(unit)
    if not (ctrb and obsv):
        warnings.warn(
            "unit is not controllable and observable; spectrum recovery may "
            "be incomplete",
            stacklevel=2,
        )
    raw: list[RawRecovered] = []
    for mu in mu_list:
        mu = complex(mu)
        try:
            lam = g_map(mu, unit, sigmaA_tol=sigmaA_tol)
        except ResolventError:
            raw.append(
                RawRecovered(
                    mu=mu, lam=complex(np.nan, np.nan),
                    sensitivity=complex(np.nan, np.nan), degenerate=True,
                )
            )
            continue
        if lam == 0 and _distance_to_spectrum(mu, unit) <= sigmaA_tol:
            delta = complex(np.inf)
        else:
            delta = sensitivity(mu, unit)
        raw.append(RawRecovered(mu=mu, lam=lam, sensitivity=delta))

    usable = [i for i, entry in enumerate(raw) if not entry.degenerate]
    lams = np.array([raw[i].lam for i in usable], dtype=complex)
    tol = group_tol if group_tol is not None else _default_group_tol(lams)

    groups = _greedy_groups(lams, usable, tol, cap=unit.m) if usable else []
    aggregated = []
    for members in groups:
        weights = np.array([raw[i].weight for i in members])
        values = np.array([raw[i].lam for i in members])
        if weights.sum() > 0:
            value = complex((values * weights).sum() / weights.sum())
        else:
            value = complex(values.mean())
        if undirected:
            if abs(value.imag) <= tol:
                value = complex(value.real, 0.0)
            else:
                warnings.warn(
                    f"aggregated eigenvalue {value} keeps imaginary part "
                    f"{value.imag:.3e} beyond group_tol on an undirected graph",
                    stacklevel=2,
                )
        aggregated.append(SpectrumGroup(value=value, members=tuple(sorted(members))))

    aggregated.sort(key=lambda g: (g.value.real, g.value.imag, g.members))
    return RecoveredSpectrum(
        raw=tuple(raw), aggregated=tuple(aggregated), group_tol=tol
    )
