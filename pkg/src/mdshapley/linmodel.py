"""Location-scatter model and squared Mahalanobis distances.

The :class:`LocationScatter` model bundles a center ``mu`` with a covariance
``sigma``, its lower-triangular Cholesky factor, and the precision matrix
``omega``.  All downstream computations (Shapley values, cell detection,
simulation) share one immutable model instance, so the factorization and the
inverse are computed exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NonFinite,
    NotPositiveDefinite,
)

# A Cholesky pivot (squared diagonal entry of the factor) below this fraction
# of the largest diagonal entry of sigma is treated as a failure.
PD_PIVOT_RTOL = 1e-10

SYMMETRY_RTOL = 1e-12


def as_vector(x, p: int | None = None, name: str = "x") -> np.ndarray:
    """Validate and return ``x`` as a finite 1-D float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if p is not None and arr.shape[0] != p:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {p}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains NaN or infinite entries")
    return arr


def validate_subset(S: Iterable[int], p: int) -> tuple[int, ...]:
    """Return ``S`` as a sorted tuple of distinct indices in ``{0..p-1}``."""
    idx = []
    for j in S:
        i = int(j)
        if i != j:
            raise IndexOutOfRange(f"index {j!r} is not an integer")
        if not 0 <= i < p:
            raise IndexOutOfRange(f"index {i} outside 0..{p - 1}")
        idx.append(i)
    return tuple(sorted(set(idx)))


@dataclass(frozen=True)
class LocationScatter:
    """Immutable (mu, sigma) model with cached factorization and precision.

    Attributes
    ----------
    mu : ndarray, shape (p,)
        Center vector.
    sigma : ndarray, shape (p, p)
        Symmetric positive-definite covariance matrix.
    omega : ndarray, shape (p, p)
        Precision matrix, the inverse of ``sigma``.
    chol : ndarray, shape (p, p)
        Lower-triangular Cholesky factor of ``sigma``.
    """

    mu: np.ndarray
    sigma: np.ndarray
    omega: np.ndarray
    chol: np.ndarray

    @property
    def p(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class MaskedVector:
    """A vector with coordinates outside ``S`` replaced by the model center."""

    base_x: np.ndarray
    S: tuple[int, ...]
    resolved: np.ndarray


def build_model(mu, sigma) -> LocationScatter:
    """Construct a :class:`LocationScatter` from a center and covariance.

    The covariance must be symmetric (1e-12 relative) and positive definite:
    every Cholesky pivot has to exceed ``PD_PIVOT_RTOL`` times the largest
    diagonal entry.  The precision matrix is obtained from the triangular
    factor, never by a general-purpose inverse.
    """
    mu = as_vector(mu, name="mu").copy()
    p = mu.shape[0]
    if p < 1:
        raise DimensionMismatch("mu must have at least one coordinate")
    sig = np.asarray(sigma, dtype=float)
    if sig.shape != (p, p):
        raise DimensionMismatch(f"sigma has shape {sig.shape}, expected ({p}, {p})")
    if not np.all(np.isfinite(sig)):
        raise NonFinite("sigma contains NaN or infinite entries")
    scale = float(np.max(np.abs(sig)))
    if scale > 0 and float(np.max(np.abs(sig - sig.T))) > SYMMETRY_RTOL * scale:
        raise DimensionMismatch("sigma is not symmetric")
    sig = 0.5 * (sig + sig.T)

    max_diag = float(np.max(np.diagonal(sig))) if p else 0.0
    if max_diag <= 0.0:
        raise NotPositiveDefinite("sigma has a non-positive diagonal")
    try:
        chol = np.linalg.cholesky(sig)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"sigma is not positive definite: {exc}") from exc
    pivots = np.diagonal(chol) ** 2
    if np.min(pivots) <= PD_PIVOT_RTOL * max_diag:
        raise NotPositiveDefinite(
            f"factorization pivot {np.min(pivots):.3e} below tolerance "
            f"{PD_PIVOT_RTOL * max_diag:.3e}"
        )

    inv_chol = solve_triangular(chol, np.eye(p), lower=True, check_finite=False)
    omega = inv_chol.T @ inv_chol
    omega = 0.5 * (omega + omega.T)

    for arr in (mu, sig, omega, chol):
        arr.setflags(write=False)
    return LocationScatter(mu=mu, sigma=sig, omega=omega, chol=chol)


def md2(x, model: LocationScatter) -> float:
    """Squared Mahalanobis distance ``(x - mu)' omega (x - mu)``."""
    x = as_vector(x, model.p)
    d = x - model.mu
    return float(d @ (model.omega @ d))


def masked_vector(x, S: Iterable[int], model: LocationScatter) -> MaskedVector:
    """Resolve ``x`` with all coordinates outside ``S`` set to ``mu``."""
    x = as_vector(x, model.p)
    S = validate_subset(S, model.p)
    resolved = model.mu.copy()
    if S:
        idx = list(S)
        resolved[idx] = x[idx]
    resolved.setflags(write=False)
    return MaskedVector(base_x=x, S=S, resolved=resolved)


def masked_md2(x, S: Iterable[int], model: LocationScatter) -> float:
    """Squared Mahalanobis distance of the masked vector.

    Coordinates outside ``S`` sit exactly at the center, so only the
    coordinates in ``S`` contribute; the quadratic form is still taken under
    the full p-dimensional precision matrix.  For ``S`` empty the result
    is 0, and for the full index set it equals :func:`md2`.
    """
    mv = masked_vector(x, S, model)
    d = mv.resolved - model.mu
    return float(d @ (model.omega @ d))
