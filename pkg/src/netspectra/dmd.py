"""Dynamic mode decomposition of shift-stacked snapshot data.

Pairs the data matrix columns (X = all but last, Y = all but first), takes a
reduced SVD of X, and diagonalizes the projected one-step operator
T = U* Y V Sigma^{-1}. Discrete eigenvalues nu convert to continuous-time
eigenvalues mu = log(nu)/dt on the principal branch, which is faithful only
while |Im(mu)|*dt < pi — choose the sampling period accordingly.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .observation import DataMatrix

__all__ = [
    "DmdResult",
    "OutlierPolicy",
    "DmdError",
    "dmd",
    "filter_outliers",
    "reconstruct",
]


class DmdError(RuntimeError):
    """Raised when the decomposition cannot proceed (degenerate data)."""


@dataclass(frozen=True)
class DmdResult:
    """Eigen-decomposition of the linear one-step operator fitted to data.

    Fields:
        discrete_eigs: complex eigenvalues nu of the one-step map.
        continuous_eigs: mu = log(nu)/dt, principal branch.
        modes: (q1, n_eigs) complex matrix, one mode column per eigenvalue.
        singular_values: full singular-value list of X (before truncation).
        rank_used: number of singular values retained.
        dt: sampling period used for the discrete-to-continuous conversion.
    """

    discrete_eigs: np.ndarray
    continuous_eigs: np.ndarray
    modes: np.ndarray
    singular_values: np.ndarray
    rank_used: int
    dt: float

    @property
    def n_eigs(self) -> int:
        return self.discrete_eigs.shape[0]

    def to_csv(self, target: Union[str, Path, io.TextIOBase]) -> None:
        """Write eigenvalues as CSV with Re/Im columns (one row per mode)."""
        data = np.column_stack(
            [
                self.discrete_eigs.real,
                self.discrete_eigs.imag,
                self.continuous_eigs.real,
                self.continuous_eigs.imag,
            ]
        )
        header = "re_discrete,im_discrete,re_continuous,im_continuous"
        np.savetxt(target, data, delimiter=",", header=header, comments="# ")


def dmd(data: DataMatrix, rank_tol: float = 1e-10) -> DmdResult:
    """Decompose a data matrix into modes and eigenvalues.

    Args:
        data: shift-stacked data matrix (carries the sampling period).
        rank_tol: relative singular-value cutoff; directions with
            sigma_i <= rank_tol * sigma_1 are discarded. The cutoff controls
            noise amplification through Sigma^{-1}.

    Raises:
        DmdError: if X is identically zero or no singular value survives
            the cutoff.
    """
    Z = data.Z
    X, Y = Z[:, :-1], Z[:, 1:]
    if not np.any(X):
        raise DmdError("left snapshot block is identically zero")
    U, svals, Vh = np.linalg.svd(X, full_matrices=False)
    rank = int(np.sum(svals > rank_tol * svals[0]))
    if rank < 1:
        raise DmdError("no singular value above the truncation tolerance")
    Ur = U[:, :rank]
    Vr = Vh[:rank].conj().T
    # Projected one-step operator; stays real for real data so conjugate
    # eigenvalue pairs come out exactly paired.
    T = Ur.conj().T @ Y @ (Vr / svals[:rank])
    nu, W = np.linalg.eig(T)
    modes = Ur @ W

    zero = np.abs(nu) < 1e-300
    if np.any(zero):
        warnings.warn(
            f"dropped {int(zero.sum())} zero discrete eigenvalue(s) "
            "(nilpotent directions have no finite continuous counterpart)",
            stacklevel=2,
        )
        nu, modes = nu[~zero], modes[:, ~zero]

    order = np.lexsort((nu.imag, nu.real))
    nu, modes = nu[order], modes[:, order]
    mu = np.log(nu.astype(complex)) / data.dt
    return DmdResult(
        discrete_eigs=nu.astype(complex),
        continuous_eigs=mu,
        modes=modes.astype(complex),
        singular_values=svals,
        rank_used=rank,
        dt=data.dt,
    )


@dataclass(frozen=True)
class OutlierPolicy:
    """Thresholds for discarding spurious continuous-time eigenvalues.

    ``im_max = None`` resolves to 0.95 * pi / dt (just inside the band the
    sampling period can represent).
    """

    re_max: float = 0.05
    re_min: float = -50.0
    im_max: Optional[float] = None

    def resolve_im_max(self, dt: Optional[float]) -> float:
        if self.im_max is not None:
            return self.im_max
        if dt is None:
            return np.inf
        return 0.95 * np.pi / dt


def filter_outliers(
    eigs, policy: OutlierPolicy = OutlierPolicy(), dt: Optional[float] = None
) -> np.ndarray:
    """Drop eigenvalues outside the plausible band.

    An eigenvalue survives when re_min <= Re(mu) <= re_max and
    |Im(mu)| <= im_max. Large positive real parts are near-unstable fit
    artifacts; very negative real parts and near-band-edge imaginary parts
    are aliasing artifacts. May return an empty array.
    """
    eigs = np.asarray(list(eigs), dtype=complex)
    if eigs.size == 0:
        return eigs
    im_max = policy.resolve_im_max(dt)
    keep = (
        (eigs.real <= policy.re_max)
        & (eigs.real >= policy.re_min)
        & (np.abs(eigs.imag) <= im_max)
    )
    return eigs[keep]


def reconstruct(result: DmdResult, z0: np.ndarray, num_snapshots: int) -> np.ndarray:
    """Reconstruct snapshots z_j ~= Phi diag(nu^j) b from the decomposition.

    The amplitude vector b solves the least-squares fit Phi b = z0.

    Returns:
        (q1, num_snapshots) complex array with column j approximating z_j.
    """
    z0 = np.asarray(z0).reshape(-1)
    b, *_ = np.linalg.lstsq(result.modes, z0.astype(complex), rcond=None)
    powers = result.discrete_eigs[None, :] ** np.arange(num_snapshots)[:, None]
    return (result.modes @ (powers * b[None, :]).T)
