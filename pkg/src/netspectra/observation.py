"""Observation functions, snapshot assembly, and shift-stacked data matrices.

The measurement model: r experiments are run from independent initial
conditions, each trajectory is passed through an observation function
f: R^{mn} -> R^p, and the per-time-step outputs are stacked into snapshot
vectors z_k in R^{rp}. Shift-stacking then augments the snapshot rows with c
time-shifted copies (delay embedding), which lets a low-dimensional
observation expose more dynamical modes.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "ObservationFunction",
    "SnapshotSet",
    "DataMatrix",
    "ObservabilityReport",
    "obs_identity",
    "obs_select",
    "obs_sin_pair",
    "observe",
    "build_data_matrix",
    "check_mode_nonvanishing",
]

_FD_STEP = 1e-6


@dataclass(frozen=True)
class ObservationFunction:
    """A map f: R^{mn} -> R^p applied to full network states.

    ``fn`` should broadcast over leading axes ((..., mn) -> (..., p));
    non-broadcasting callables are handled row-by-row. ``grad`` is an
    optional analytic gradient x -> (p, mn); gradient_at falls back to
    central finite differences (step 1e-6) without it.
    """

    p: int
    fn: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError("observation dimension p must be >= 1")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.fn(x)

    def gradient_at(self, x: np.ndarray) -> np.ndarray:
        """Gradient matrix (p, mn) of f at x."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.grad is not None:
            return np.atleast_2d(np.asarray(self.grad(x), dtype=float))
        mn = x.shape[0]
        out = np.empty((self.p, mn))
        for j in range(mn):
            step = np.zeros(mn)
            step[j] = _FD_STEP
            fp = np.asarray(self.fn(x + step), dtype=float).reshape(-1)
            fm = np.asarray(self.fn(x - step), dtype=float).reshape(-1)
            out[:, j] = (fp - fm) / (2 * _FD_STEP)
        return out


def obs_identity(mn: int) -> ObservationFunction:
    """Full-state observation f(X) = X."""
    return ObservationFunction(
        p=mn, fn=lambda x: x, grad=lambda x: np.eye(mn), name="identity"
    )


def obs_select(indices, mn: int) -> ObservationFunction:
    """Observe selected state components f(X) = X[indices]."""
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise ValueError("need at least one index")
    if any(i < 0 or i >= mn for i in idx):
        raise ValueError(f"indices out of range for state dimension {mn}")
    picks = np.array(idx)
    grad_mat = np.zeros((len(idx), mn))
    grad_mat[np.arange(len(idx)), picks] = 1.0

    return ObservationFunction(
        p=len(idx),
        fn=lambda x: x[..., picks],
        grad=lambda x: grad_mat,
        name=f"select{idx}",
    )


def obs_sin_pair(i: int, j: int, mn: int) -> ObservationFunction:
    """Nonlinear two-channel observation [sin(X_i + X_j), sin(X_i - X_j)]."""
    if not (0 <= i < mn and 0 <= j < mn):
        raise ValueError(f"indices out of range for state dimension {mn}")

    def fn(x):
        return np.stack(
            [np.sin(x[..., i] + x[..., j]), np.sin(x[..., i] - x[..., j])], axis=-1
        )

    def grad(x):
        out = np.zeros((2, mn))
        out[0, i] += np.cos(x[i] + x[j])
        out[0, j] += np.cos(x[i] + x[j])
        out[1, i] += np.cos(x[i] - x[j])
        out[1, j] -= np.cos(x[i] - x[j])
        return out

    return ObservationFunction(p=2, fn=fn, grad=grad, name=f"sin_pair({i},{j})")


@dataclass(frozen=True)
class SnapshotSet:
    """Stacked observations z_k in R^{rp} for k = 0..K.

    Fields:
        r: number of experiments (initial conditions).
        p: observation dimension per experiment.
        dt: sampling period.
        snapshots: (K+1, r*p) array; row k is z_k.
    """

    r: int
    p: int
    dt: float
    snapshots: np.ndarray

    def __post_init__(self) -> None:
        snaps = np.atleast_2d(np.asarray(self.snapshots, dtype=float))
        if snaps.shape[1] != self.r * self.p:
            raise ValueError(
                f"snapshots have width {snaps.shape[1]}, expected r*p = {self.r * self.p}"
            )
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "snapshots", snaps)

    @property
    def num_steps(self) -> int:
        """K: number of samples after the initial one."""
        return self.snapshots.shape[0] - 1

    def to_csv(self, target: Union[str, Path, io.TextIOBase]) -> None:
        """Write snapshots as CSV with r, p, dt recorded in header comments."""
        header = f"r={self.r} p={self.p} dt={self.dt!r}"
        np.savetxt(target, self.snapshots, delimiter=",", header=header, comments="# ")

    @staticmethod
    def from_csv(source: Union[str, Path, io.TextIOBase]) -> "SnapshotSet":
        """Read a snapshot CSV produced by to_csv (or hand-written with the
        same ``# r=<int> p=<int> dt=<float>`` first comment line)."""
        if isinstance(source, (str, Path)):
            with open(source, "r", encoding="utf-8") as fh:
                return SnapshotSet.from_csv(fh)
        meta: dict[str, float] = {}
        rows = []
        for raw in source:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line.lstrip("#").split():
                    if "=" in token:
                        key, _, val = token.partition("=")
                        meta[key.strip()] = float(val)
                continue
            rows.append([float(tok) for tok in line.split(",")])
        for key in ("r", "p", "dt"):
            if key not in meta:
                raise ValueError(f"snapshot CSV is missing '{key}=' metadata")
        return SnapshotSet(
            r=int(meta["r"]), p=int(meta["p"]), dt=meta["dt"], snapshots=np.array(rows)
        )


@dataclass(frozen=True)
class DataMatrix:
    """Shift-stacked data matrix.

    Fields:
        Z: (q1, q2+1) array with q1 = c*r*p rows and time-ordered columns;
            row block b holds the snapshots shifted by b*delta.
        c: number of stacked shifted copies.
        delta: shift increment between copies.
        dt: sampling period, carried along for eigenvalue conversion.
    """

    Z: np.ndarray
    c: int
    delta: int
    dt: float

    def __post_init__(self) -> None:
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        if Z.shape[1] < 2:
            raise ValueError("data matrix needs at least 2 columns")
        object.__setattr__(self, "Z", Z)

    @property
    def q1(self) -> int:
        return self.Z.shape[0]

    @property
    def q2(self) -> int:
        return self.Z.shape[1] - 1


def observe(trajectories, f: ObservationFunction) -> SnapshotSet:
    """Apply an observation function to r trajectories and stack the outputs.

    z_k = (f(X^(1)(k dt)), ..., f(X^(r)(k dt))) in trajectory order.

    Raises:
        ValueError: trajectories differ in length or sampling period, or the
            observation output has the wrong dimension.
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("need at least one trajectory")
    t0 = trajectories[0]
    for t in trajectories[1:]:
        if t.states.shape[0] != t0.states.shape[0]:
            raise ValueError("trajectories differ in snapshot count")
        if abs(t.dt - t0.dt) > 1e-12 * max(t0.dt, 1.0):
            raise ValueError("trajectories differ in sampling period")
    blocks = [_apply_observation(f, t.states) for t in trajectories]
    return SnapshotSet(
        r=len(trajectories), p=f.p, dt=t0.dt, snapshots=np.hstack(blocks)
    )


def _apply_observation(f: ObservationFunction, states: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f.fn(states), dtype=float)
        if out.ndim == 1 and f.p == 1:
            out = out[:, None]
        if out.shape == (states.shape[0], f.p):
            return out
    except Exception:
        pass
    # Non-broadcasting observation: evaluate one state at a time.
    return np.stack(
        [np.asarray(f.fn(row), dtype=float).reshape(-1) for row in states]
    )


def build_data_matrix(s: SnapshotSet, c: int = 2, delta: int = 5) -> DataMatrix:
    """Stack c copies of the snapshot sequence shifted by multiples of delta.

    Row block b (0-based), column j holds z_{j + b*delta}, so the matrix has
    q1 = c*r*p rows and q2+1 = K - (c-1)*delta + 1 columns.

    Raises:
        ValueError: when K - (c-1)*delta < 1 (too few snapshots for the
            requested stacking).
    """
    if c < 1:
        raise ValueError("c must be >= 1")
    if c > 1 and delta < 1:
        raise ValueError("delta must be >= 1 when c > 1")
    K = s.num_steps
    q2 = K - (c - 1) * delta
    if q2 < 1:
        raise ValueError(
            f"infeasible stacking: K={K}, c={c}, delta={delta} leaves q2={q2}"
        )
    width = s.r * s.p
    Z = np.empty((c * width, q2 + 1))
    for b in range(c):
        Z[b * width : (b + 1) * width, :] = s.snapshots[b * delta : b * delta + q2 + 1].T
    return DataMatrix(Z=Z, c=c, delta=delta, dt=s.dt)


@dataclass(frozen=True)
class ObservabilityReport:
    """Outcome of the mode-nonvanishing (observability) check."""

    observable: bool
    rank: int
    dim: int


def check_mode_nonvanishing(K_matrix: np.ndarray, grad_f_at_eq: np.ndarray) -> ObservabilityReport:
    """Check that the observation can see every mode of the linearized system.

    Builds the observability matrix [Q; Q Khat; ...; Q Khat^(mn-1)] with
    Q = grad f at the equilibrium and Khat = K normalized by its spectral
    norm (normalization does not change the rank but avoids overflow for
    large powers). Numerical rank uses SVD with tolerance 1e-10 * sigma_max.
    """
    K = np.asarray(K_matrix, dtype=float)
    Q = np.atleast_2d(np.asarray(grad_f_at_eq, dtype=float))
    mn = K.shape[0]
    if K.shape != (mn, mn) or Q.shape[1] != mn:
        raise ValueError("inconsistent dimensions between K and the gradient")
    norm = np.linalg.norm(K, 2)
    Khat = K / norm if norm > 0 else K
    blocks = [Q]
    for _ in range(mn - 1):
        blocks.append(blocks[-1] @ Khat)
    obs_matrix = np.vstack(blocks)
    svals = np.linalg.svd(obs_matrix, compute_uv=False)
    rank = int(np.sum(svals > 1e-10 * svals[0])) if svals[0] > 0 else 0
    return ObservabilityReport(observable=(rank == mn), rank=rank, dim=mn)
