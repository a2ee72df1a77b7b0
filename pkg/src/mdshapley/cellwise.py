"""Cellwise outlier detection and imputation.

Two iterative detectors are provided.  SCD shifts the worst cells of an
outlying observation toward the model center until the squared Mahalanobis
distance drops below a chi-square cutoff; the Shapley vector decides which
cells move.  MOE replaces the center with a per-observation reference point
``mu_tilde`` (the least-squares position of each cell given the others),
uses a non-central chi-square cutoff, and flags cells by how far they had to
travel.  Both return a :class:`CellFlagResult` carrying the imputed vector,
the flagged set, the final explanation, and an iteration history.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .distributions import chi2_quantile, noncentral_chi2_quantile
from .errors import EmptySubset, SingularSubproblem
from .linmodel import LocationScatter, as_vector, validate_subset
from .shapley import ShapleyExplanation, shapley_value

# Total number of inner shift steps after which the detectors give up and
# report `iteration_cap_exceeded` instead of looping further.
ITERATION_CAP = 10_000

# Coordinates whose Shapley value comes within this absolute distance of the
# maximum join the flagged set together with the argmax.
ARGMAX_TIE_TOL = 1e-12

STATUS_CONVERGED = "converged"
STATUS_CAP = "iteration_cap_exceeded"


class Snapshot(NamedTuple):
    """State of the iteration: step counter, Shapley vector, squared distance."""

    iteration: int
    phi: np.ndarray
    md2: float


@dataclass(frozen=True)
class ReplacementSolution:
    """Least-squares replacement for the cells in ``S``.

    ``beta_hat`` (aligned with sorted ``S``) minimizes the squared
    Mahalanobis distance of ``x`` after subtracting ``beta`` from the
    coordinates in ``S``; ``achieved_md2`` is that minimum.
    """

    S: tuple[int, ...]
    beta_hat: np.ndarray
    achieved_md2: float


@dataclass(frozen=True)
class CellFlagResult:
    """Outcome of a cellwise detection run.

    ``S`` preserves flag order for SCD; for MOE it is the ascending set that
    survived the shift-distance threshold.  ``x_tilde`` equals the input
    outside ``S``.  ``d`` holds standardized cumulative shift distances (MOE;
    zeros for SCD).  ``cutoff`` is the last active cutoff of the iteration.
    """

    x_tilde: np.ndarray
    S: tuple[int, ...]
    mu_tilde: np.ndarray
    d: np.ndarray
    phi_final: ShapleyExplanation
    history: tuple[Snapshot, ...]
    status: str
    cutoff: float


def beta_hat(x, S: Iterable[int], model: LocationScatter) -> ReplacementSolution:
    """Solve for the replacement amounts on the cells in ``S``.

    The optimum of ``md2(x - E_S beta)`` over ``beta`` is the solution of the
    precision submatrix system on ``S`` with right-hand side
    ``[omega (x - mu)]_S``.  With a single cell this reduces to
    ``beta = [omega (x - mu)]_j / omega_jj``.
    """
    x = as_vector(x, model.p)
    S = validate_subset(S, model.p)
    if not S:
        raise EmptySubset("beta_hat requires a nonempty index set")
    idx = list(S)
    w = model.omega @ (x - model.mu)
    try:
        beta = np.linalg.solve(model.omega[np.ix_(idx, idx)], w[idx])
    except np.linalg.LinAlgError as exc:
        raise SingularSubproblem(f"precision submatrix on {S} is singular") from exc
    x_rep = x.copy()
    x_rep[idx] -= beta
    d = x_rep - model.mu
    achieved = float(d @ (model.omega @ d))
    return ReplacementSolution(S=S, beta_hat=beta, achieved_md2=achieved)


def reference_point(x, S: Iterable[int], model: LocationScatter) -> np.ndarray:
    """Coordinate-wise expected position of ``x`` given the cells outside ``S``.

    For every coordinate j the replacement problem is solved on ``S + {j}``
    and only the j-th component of the solution is kept:
    ``mu_tilde_j = x_j - beta_hat_j(S + {j})``.  Coordinates in ``S`` share
    one solve; for ``S`` empty the whole vector reduces to the one-cell
    formula ``x - (omega d) / diag(omega)``.
    """
    x = as_vector(x, model.p)
    p = model.p
    S = validate_subset(S, p)
    omega = model.omega
    w = omega @ (x - model.mu)

    if not S:
        return x - w / np.diagonal(omega)

    out = np.empty(p)
    idx = list(S)
    try:
        beta_S = np.linalg.solve(omega[np.ix_(idx, idx)], w[idx])
    except np.linalg.LinAlgError as exc:
        raise SingularSubproblem(f"precision submatrix on {S} is singular") from exc
    out[idx] = x[idx] - beta_S

    for j in range(p):
        if j in S:
            continue
        sj = sorted(S + (j,))
        pos = sj.index(j)
        try:
            beta = np.linalg.solve(omega[np.ix_(sj, sj)], w[sj])
        except np.linalg.LinAlgError as exc:
            raise SingularSubproblem(
                f"precision submatrix on {tuple(sj)} is singular"
            ) from exc
        out[j] = x[j] - beta[pos]
    return out


def explain_given_cells(x, S: Iterable[int], model: LocationScatter) -> ShapleyExplanation:
    """Local explanation of ``x`` against the reference point for cells ``S``.

    Useful to explain flag sets produced by external detectors: the Shapley
    vector decomposes the squared distance of ``x`` from where the regular
    cells say it should sit.
    """
    mu_tilde = reference_point(x, S, model)
    return shapley_value(x, model, reference=mu_tilde)


def _phi_md2(xt: np.ndarray, ref: np.ndarray, omega: np.ndarray):
    d = xt - ref
    w = omega @ d
    return d * w, float(d @ w)


def _join_argmax(phi: np.ndarray, flagged: np.ndarray, order: list[int]) -> None:
    """Flag every coordinate within tie tolerance of the maximum."""
    top = float(np.max(phi))
    for j in np.flatnonzero(phi >= top - ARGMAX_TIE_TOL):
        if not flagged[j]:
            flagged[j] = True
            order.append(int(j))


def _split_max(phi: np.ndarray, flagged: np.ndarray) -> tuple[float, float]:
    """Max phi over the flagged set and over its complement (-inf if empty)."""
    m_in = float(np.max(phi[flagged])) if flagged.any() else -np.inf
    m_out = float(np.max(phi[~flagged])) if not flagged.all() else -np.inf
    return m_in, m_out


def scd(
    x,
    model: LocationScatter,
    delta: float = 0.1,
    level: float = 0.99,
) -> CellFlagResult:
    """Shapley Cell Detector: iterative shift of worst cells toward the mean.

    While the observation is outlying at the chi-square cutoff, the
    coordinate(s) with maximal Shapley value join the flagged set, and the
    flagged cells move a fraction ``delta`` of their remaining way toward
    ``mu`` for as long as they dominate the unflagged ones.  The inner loop
    also exits as soon as the distance drops below the cutoff, and an empty
    complement compares as -inf, so full flagging terminates cleanly.
    """
    x = as_vector(x, model.p)
    _check_delta(delta)
    p = model.p
    cut = chi2_quantile(p, level)
    omega = model.omega
    mu = model.mu

    xt = x.copy()
    flagged = np.zeros(p, dtype=bool)
    order: list[int] = []
    phi, m2 = _phi_md2(xt, mu, omega)
    history = [Snapshot(0, phi.copy(), m2)]
    budget = ITERATION_CAP
    step = 0
    status = STATUS_CONVERGED

    while m2 > cut:
        _join_argmax(phi, flagged, order)
        while True:
            m_in, m_out = _split_max(phi, flagged)
            if not (m_in > m_out) or m2 <= cut:
                break
            if budget == 0:
                break
            xt[flagged] -= (xt[flagged] - mu[flagged]) * delta
            budget -= 1
            step += 1
            phi, m2 = _phi_md2(xt, mu, omega)
            history.append(Snapshot(step, phi.copy(), m2))
        if budget == 0 and m2 > cut:
            status = STATUS_CAP
            break

    return CellFlagResult(
        x_tilde=xt,
        S=tuple(order),
        mu_tilde=mu.copy(),
        d=np.zeros(p),
        phi_final=shapley_value(x, model),
        history=tuple(history),
        status=status,
        cutoff=cut,
    )


def moe(
    x,
    model: LocationScatter,
    delta: float = 0.1,
    eta: float = 0.2,
    level: float = 0.99,
) -> CellFlagResult:
    """Multivariate Outlier Explainer: reference-point detection and imputation.

    The reference point starts at the one-cell least-squares position of
    every coordinate and is refreshed from the original observation once per
    outer iteration as the flagged set grows; the Shapley vector is
    recomputed against each refreshed reference before the next selection.
    The outlyingness cutoff is the non-central chi-square quantile with
    non-centrality ``md2(mu_tilde)``, recomputed alongside.  Cumulative shift
    magnitudes ``d`` (scaled by the coordinate standard deviations) decide
    the final flags: cells with ``d_j > eta * max d`` are flagged, the
    reference point and explanation are rebuilt from the original ``x`` for
    that set, and the flagged cells are imputed with the reference values.
    """
    x = as_vector(x, model.p)
    _check_delta(delta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    p = model.p
    omega = model.omega
    mu = model.mu

    def active_cutoff(ref: np.ndarray) -> float:
        dd = ref - mu
        lam = float(dd @ (omega @ dd))
        return noncentral_chi2_quantile(p, max(lam, 0.0), level)

    xt = x.copy()
    dist = np.zeros(p)
    flagged = np.zeros(p, dtype=bool)
    order: list[int] = []
    mu_tilde = reference_point(x, (), model)
    phi, m2 = _phi_md2(xt, mu_tilde, omega)
    cut = active_cutoff(mu_tilde)
    history = [Snapshot(0, phi.copy(), m2)]
    budget = ITERATION_CAP
    step = 0
    status = STATUS_CONVERGED
    entered = False

    while m2 > cut:
        entered = True
        _join_argmax(phi, flagged, order)
        idx = np.flatnonzero(flagged)
        while True:
            m_in, m_out = _split_max(phi, flagged)
            if not (m_in > m_out) or m2 <= cut:
                break
            if budget == 0:
                break
            c = (xt[idx] - mu_tilde[idx]) * delta
            dist[idx] += np.abs(c)
            xt[idx] -= c
            budget -= 1
            step += 1
            phi, m2 = _phi_md2(xt, mu_tilde, omega)
            history.append(Snapshot(step, phi.copy(), m2))
        if budget == 0 and m2 > cut:
            status = STATUS_CAP
            break
        mu_tilde = reference_point(x, tuple(order), model)
        phi, m2 = _phi_md2(xt, mu_tilde, omega)
        cut = active_cutoff(mu_tilde)

    if entered:
        # Close the history with the state against the last reference point.
        step += 1
        history.append(Snapshot(step, phi.copy(), m2))

    # Scale-free shift distances decide the final flags.
    d_std = dist / np.sqrt(np.diagonal(model.sigma))
    top = float(d_std.max()) if p else 0.0
    S_final = tuple(int(j) for j in np.flatnonzero(d_std > eta * top)) if top > 0 else ()

    mu_final = reference_point(x, S_final, model)
    phi_final = shapley_value(x, model, reference=mu_final)
    x_tilde = x.copy()
    if S_final:
        x_tilde[list(S_final)] = mu_final[list(S_final)]

    return CellFlagResult(
        x_tilde=x_tilde,
        S=S_final,
        mu_tilde=mu_final,
        d=d_std,
        phi_final=phi_final,
        history=tuple(history),
        status=status,
        cutoff=cut,
    )


def _check_delta(delta: float) -> None:
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
