"""Chi-square and non-central chi-square cutoffs.

Squared Mahalanobis distances of Gaussian observations follow a chi-square
distribution with p degrees of freedom; measured against a shifted reference
point they follow the non-central variant with non-centrality equal to the
squared distance of the shift.  Detection cutoffs are quantiles of these
distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy import stats

from .errors import InvalidLevel, NegativeLambda


@dataclass(frozen=True)
class Cutoff:
    """A quantile cutoff: dof, level, non-centrality, and the value itself."""

    dof: int
    level: float
    lam: float
    value: float


def _check_dof(dof: int) -> int:
    dof = int(dof)
    if dof < 1:
        raise InvalidLevel(f"degrees of freedom must be >= 1, got {dof}")
    return dof


def _check_level(level: float) -> float:
    level = float(level)
    if not 0.0 < level < 1.0:
        raise InvalidLevel(f"level must lie strictly between 0 and 1, got {level}")
    return level


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if lam < 0.0:
        raise NegativeLambda(f"non-centrality must be nonnegative, got {lam}")
    return lam


def chi2_cdf(dof: int, x: float) -> float:
    """CDF of the central chi-square distribution."""
    return float(stats.chi2.cdf(x, df=_check_dof(dof)))


def chi2_quantile(dof: int, level: float) -> float:
    """Inverse CDF of the central chi-square distribution."""
    dof = _check_dof(dof)
    level = _check_level(level)
    return float(stats.chi2.ppf(level, df=dof))


def noncentral_chi2_cdf(dof: int, lam: float, x: float) -> float:
    """CDF of the non-central chi-square distribution."""
    dof = _check_dof(dof)
    lam = _check_lambda(lam)
    if lam == 0.0:
        return float(stats.chi2.cdf(x, df=dof))
    return float(stats.ncx2.cdf(x, df=dof, nc=lam))


def noncentral_chi2_quantile(dof: int, lam: float, level: float) -> float:
    """Inverse CDF of the non-central chi-square distribution.

    Reduces to :func:`chi2_quantile` at ``lam == 0``.
    """
    dof = _check_dof(dof)
    lam = _check_lambda(lam)
    level = _check_level(level)
    if lam == 0.0:
        return float(stats.chi2.ppf(level, df=dof))
    return float(stats.ncx2.ppf(level, df=dof, nc=lam))


def cutoff(dof: int, level: float, lam: float = 0.0) -> Cutoff:
    """Bundle a quantile cutoff with the parameters that produced it."""
    value = noncentral_chi2_quantile(dof, lam, level)
    return Cutoff(dof=_check_dof(dof), level=_check_level(level), lam=_check_lambda(lam), value=value)
