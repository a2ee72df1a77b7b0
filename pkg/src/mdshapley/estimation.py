"""Model sourcing: robust standardization, sample covariance, file ingestion.

Robust scatter estimation itself (MCD and friends) is out of scope; models
either come from externally computed estimates via :func:`load_model`, or
from simple sample statistics as a non-robust fallback.  Standardization is
the usual median/MAD scaling with the 1.4826 normal-consistency factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateColumn,
    DimensionMismatch,
    InsufficientRows,
    NonFinite,
    ParseError,
)
from .linmodel import LocationScatter, build_model

MAD_SCALE = 1.4826
MAD_FLOOR = 1e-12


@dataclass(frozen=True)
class StandardizationPlan:
    """Per-column medians and scaled MADs, kept for back-transformation."""

    medians: np.ndarray
    mads: np.ndarray


def robust_standardize(X) -> tuple[np.ndarray, StandardizationPlan]:
    """Center by column medians and scale by normal-consistent MADs.

    Raises :class:`DegenerateColumn` when a column's MAD vanishes (half or
    more of its values tied at the median), since no scale can be inferred.
    """
    X = _as_matrix(X)
    if X.shape[0] < 2:
        raise InsufficientRows("standardization needs at least 2 rows")
    medians = np.median(X, axis=0)
    mads = MAD_SCALE * np.median(np.abs(X - medians), axis=0)
    bad = np.flatnonzero(mads < MAD_FLOOR)
    if bad.size:
        raise DegenerateColumn(f"column(s) {bad.tolist()} have zero MAD")
    Z = (X - medians) / mads
    return Z, StandardizationPlan(medians=medians, mads=mads)


def unstandardize(Z, plan: StandardizationPlan) -> np.ndarray:
    """Invert :func:`robust_standardize` for a matrix or a single row."""
    Z = np.asarray(Z, dtype=float)
    return Z * plan.mads + plan.medians


def sample_covariance(X) -> np.ndarray:
    """Unbiased sample covariance (divisor n - 1).

    Requires ``n > p``.  The result may still be rank-deficient (e.g. for
    duplicated columns); that is deliberately not repaired here, model
    construction will reject it.
    """
    X = _as_matrix(X)
    n, p = X.shape
    if n <= p:
        raise InsufficientRows(f"need more rows ({n}) than columns ({p})")
    return np.cov(X, rowvar=False, ddof=1)


def load_model(mu_source, sigma_source) -> LocationScatter:
    """Build a model from externally estimated center and covariance files.

    ``mu_source`` is a single-column CSV (one number per line);
    ``sigma_source`` is a headerless square CSV.  Both use '.' decimals.
    """
    mu = _read_numeric_csv(mu_source, name="mu")
    if mu.ndim != 1:
        raise ParseError(f"{mu_source}: expected a single column")
    sigma = _read_numeric_csv(sigma_source, name="sigma")
    if sigma.ndim == 1:
        if sigma.shape[0] != 1:
            raise ParseError(f"{sigma_source}: expected a square matrix")
        sigma = sigma.reshape(1, 1)
    if sigma.shape[0] != sigma.shape[1]:
        raise ParseError(
            f"{sigma_source}: matrix is {sigma.shape[0]}x{sigma.shape[1]}, not square"
        )
    if sigma.shape[0] != mu.shape[0]:
        raise DimensionMismatch(
            f"mu has length {mu.shape[0]} but sigma is {sigma.shape[0]}-dimensional"
        )
    return build_model(mu, sigma)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D data matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFinite("data matrix contains NaN or infinite entries")
    return X


def _read_numeric_csv(source, name: str) -> np.ndarray:
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {name} file {path}: {exc}") from exc
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: not numeric: {line!r}") from exc
    if not rows:
        raise ParseError(f"{path}: no numeric rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParseError(f"{path}: ragged rows")
    arr = np.asarray(rows, dtype=float)
    if width == 1:
        return arr[:, 0]
    return arr
