"""Dense small-dimension Gaussian algebra.

Marginalization, conditioning and 1D normal pdf/cdf evaluation shared by
the analytic intensity and prediction code.  All operations are pure and
value-semantic; densities are immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import erfc

from .errors import NumericsError

_SYM_RTOL = 1e-12
_PSD_RTOL = 1e-10
_COND_LIMIT = 1e12

_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Average a matrix with its transpose.

    Repeated Phi P Phi^T + Q propagation drifts off symmetry; every
    covariance that leaves this package passes through here.
    """
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class GaussianDensity:
    """Mean vector and covariance matrix of an N-dimensional Gaussian."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError(f"covariance must be square, got shape {cov.shape}")
        if mean.size != cov.shape[0]:
            raise ValueError(
                f"mean length {mean.size} != covariance size {cov.shape[0]}"
            )
        scale = max(np.max(np.abs(cov)), 1.0)
        if np.max(np.abs(cov - cov.T)) > _SYM_RTOL * scale:
            raise ValueError("covariance is not symmetric")
        cov = symmetrize(cov)
        eigvals = np.linalg.eigvalsh(cov)
        if eigvals[0] < -_PSD_RTOL * max(np.trace(cov), 1.0):
            raise ValueError(
                f"covariance is not positive semi-definite (min eig {eigvals[0]:g})"
            )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


def marginalize(g: GaussianDensity, keep) -> GaussianDensity:
    """Marginal density over the given (ordered) index set."""
    keep = list(keep)
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate indices in keep set: {keep}")
    for i in keep:
        if not 0 <= i < g.dim:
            raise ValueError(f"index {i} out of range for dim {g.dim}")
    idx = np.asarray(keep, dtype=int)
    return GaussianDensity(g.mean[idx], g.cov[np.ix_(idx, idx)])


def condition(g: GaussianDensity, given, values) -> GaussianDensity:
    """Density of the remaining coordinates given exact values for `given`.

    Remaining coordinates keep their original relative order.  The
    conditional covariance does not depend on `values`.
    """
    given = list(given)
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(set(given)) != len(given):
        raise ValueError(f"duplicate indices in given set: {given}")
    for i in given:
        if not 0 <= i < g.dim:
            raise ValueError(f"index {i} out of range for dim {g.dim}")
    if values.size != len(given):
        raise ValueError("values length does not match given index set")
    rest = [i for i in range(g.dim) if i not in given]
    if not rest:
        raise ValueError("cannot condition on every coordinate")
    r = np.asarray(rest, dtype=int)
    m = np.asarray(given, dtype=int)
    sig_rr = g.cov[np.ix_(r, r)]
    sig_rm = g.cov[np.ix_(r, m)]
    sig_mm = g.cov[np.ix_(m, m)]
    if np.linalg.cond(sig_mm) > _COND_LIMIT:
        raise NumericsError(
            f"conditioning block is ill-conditioned "
            f"(cond {np.linalg.cond(sig_mm):.3e} > {_COND_LIMIT:.0e})"
        )
    try:
        factor = cho_factor(sig_mm, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by cond check
        raise NumericsError(f"conditioning block not factorizable: {exc}") from exc
    mean = g.mean[r] + sig_rm @ cho_solve(factor, values - g.mean[m])
    cov = symmetrize(sig_rr - sig_rm @ cho_solve(factor, sig_rm.T))
    return GaussianDensity(mean, cov)


def normal_cdf(z):
    """Standard normal CDF via the complementary error function."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * erfc(-z / _SQRT2)
    return float(out) if out.ndim == 0 else out


def normal_pdf(x, mean=0.0, sigma=1.0):
    """1D normal pdf N(x; mean, sigma)."""
    x = np.asarray(x, dtype=float)
    u = (x - mean) / sigma
    out = np.exp(-0.5 * u * u) / (sigma * _SQRT2PI)
    return float(out) if out.ndim == 0 else out


def psd_factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular-ish factor F with F F^T = cov.

    Cholesky when positive definite, eigendecomposition fallback for
    semi-definite matrices (zero blocks are common: zero process noise,
    delta initial conditions).
    """
    cov = symmetrize(np.asarray(cov, dtype=float))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cov)
        if w[0] < -_PSD_RTOL * max(np.trace(cov), 1.0):
            raise NumericsError(
                f"matrix is not PSD within tolerance (min eig {w[0]:g})"
            ) from None
        return v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
