"""Shapley decomposition of squared Mahalanobis distances.

The squared Mahalanobis distance of an observation defines a cooperative
game over the coordinates: the worth of a coalition S is the distance of the
vector whose off-coalition coordinates are parked at the center.  For this
game the Shapley value has a closed form,

    phi_k = (x_k - mu_k) * [omega (x - mu)]_k,

and the pairwise interaction indices are

    Phi_jk = 2 (x_j - mu_j)(x_k - mu_k) omega_jk        (j != k),

with diagonals completed so that row sums reproduce ``phi``.  The
exponential-time definitions are kept as :func:`shapley_bruteforce`,
:func:`interaction_bruteforce`, and :func:`set_derivative3`; they exist to
cross-check the closed forms and are guarded against large dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionTooLarge, IndexOutOfRange, IndexOverlap
from .linmodel import LocationScatter, as_vector, validate_subset

# Above this dimension the subset enumerations are refused.
ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class ShapleyExplanation:
    """Per-coordinate outlyingness contributions of one observation.

    ``phi`` sums to ``total``, the squared Mahalanobis distance of the
    observation from ``reference`` (Efficiency).  ``reference`` is the model
    center for global explanations, or a cellwise reference point for local
    ones.  ``model_id`` identifies the model the explanation was computed
    against.
    """

    phi: np.ndarray
    total: float
    reference: np.ndarray
    model_id: int


@dataclass(frozen=True)
class InteractionMatrix:
    """Symmetric p x p matrix of pairwise Shapley interaction indices."""

    Phi: np.ndarray

    def row_sums(self) -> np.ndarray:
        return self.Phi.sum(axis=1)

    def grand_total(self) -> float:
        return float(self.Phi.sum())


def _resolve_reference(model: LocationScatter, reference) -> np.ndarray:
    if reference is None:
        return model.mu
    return as_vector(reference, model.p, name="reference")


def shapley_value(x, model: LocationScatter, reference=None) -> ShapleyExplanation:
    """Closed-form Shapley decomposition of the squared Mahalanobis distance.

    Parameters
    ----------
    x : array_like, shape (p,)
        Observation to explain.
    model : LocationScatter
        Model providing the precision matrix and the default center.
    reference : array_like, optional
        Alternative center (e.g. a cellwise reference point).  The precision
        matrix of ``model`` is used either way.

    Returns
    -------
    ShapleyExplanation
        ``phi[k] = (x_k - ref_k) * [omega (x - ref)]_k`` with
        ``sum(phi) == md2``.
    """
    x = as_vector(x, model.p)
    ref = _resolve_reference(model, reference)
    d = x - ref
    w = model.omega @ d
    phi = d * w
    return ShapleyExplanation(
        phi=phi, total=float(d @ w), reference=ref.copy(), model_id=id(model)
    )


def scaled_contributions(explanation: ShapleyExplanation) -> np.ndarray:
    """Rescale ``phi`` from squared-distance units to distance units.

    Each coordinate keeps its proportional share, but the rescaled vector
    sums to the (unsquared) Mahalanobis distance, which is the natural scale
    for plotting against a quantile cutoff.
    """
    total = explanation.total
    if total <= 0.0:
        return np.zeros_like(explanation.phi)
    return explanation.phi / math.sqrt(total)


def interaction_matrix(x, model: LocationScatter, reference=None) -> InteractionMatrix:
    """Pairwise Shapley interaction indices with completed diagonal.

    Off-diagonal entries are ``2 d_j d_k omega_jk``; the diagonal takes
    whatever is left of ``phi_j`` so that row sums equal the Shapley vector
    and the grand total equals the squared distance.
    """
    x = as_vector(x, model.p)
    ref = _resolve_reference(model, reference)
    d = x - ref
    Phi = 2.0 * np.outer(d, d) * model.omega
    phi = d * (model.omega @ d)
    np.fill_diagonal(Phi, 0.0)
    np.fill_diagonal(Phi, phi - Phi.sum(axis=1))
    return InteractionMatrix(Phi=Phi)


def _check_enumerable(p: int) -> None:
    if p > ENUMERATION_LIMIT:
        raise DimensionTooLarge(
            f"brute-force enumeration limited to p <= {ENUMERATION_LIMIT}, got {p}"
        )


def _masked_md2_table(x, model: LocationScatter):
    """Return a callable evaluating md2 of masked vectors, memoized per call."""
    d_full = x - model.mu
    omega = model.omega
    cache: dict[frozenset, float] = {}

    def value(S: frozenset) -> float:
        got = cache.get(S)
        if got is None:
            dm = np.zeros_like(d_full)
            if S:
                idx = list(S)
                dm[idx] = d_full[idx]
            got = float(dm @ (omega @ dm))
            cache[S] = got
        return got

    return value


def shapley_bruteforce(x, model: LocationScatter, k: int) -> float:
    """Shapley value of coordinate ``k`` by direct coalition enumeration.

    Sums ``|S|! (p - |S| - 1)! / p!  *  [v(S + {k}) - v(S)]`` over all
    subsets of the remaining coordinates, with compensated summation since
    the terms alternate in sign.  Test oracle only; refuses p above
    ``ENUMERATION_LIMIT``.
    """
    x = as_vector(x, model.p)
    p = model.p
    _check_enumerable(p)
    (k,) = validate_subset([k], p)
    v = _masked_md2_table(x, model)
    others = [j for j in range(p) if j != k]
    fact = [math.factorial(i) for i in range(p + 1)]
    terms = []
    for size in range(p):
        weight = fact[size] * fact[p - size - 1] / fact[p]
        for S in combinations(others, size):
            base = frozenset(S)
            terms.append(weight * (v(base | {k}) - v(base)))
    return math.fsum(terms)


def interaction_bruteforce(x, model: LocationScatter, j: int, k: int) -> float:
    """Pairwise Shapley interaction index by direct enumeration (oracle).

    Evaluates the second-order set derivative
    ``v(T+{j,k}) - v(T+{j}) - v(T+{k}) + v(T)`` over all subsets T of the
    remaining coordinates with the interaction-index weights.
    """
    x = as_vector(x, model.p)
    p = model.p
    _check_enumerable(p)
    (j,) = validate_subset([j], p)
    (k,) = validate_subset([k], p)
    if j == k:
        raise IndexOverlap("j and k must be distinct")
    v = _masked_md2_table(x, model)
    others = [i for i in range(p) if i not in (j, k)]
    fact = [math.factorial(i) for i in range(p + 1)]
    terms = []
    for size in range(p - 1):
        weight = fact[size] * fact[p - size - 2] / fact[p - 1]
        for T in combinations(others, size):
            base = frozenset(T)
            delta = (
                v(base | {j, k})
                - v(base | {j})
                - v(base | {k})
                + v(base)
            )
            terms.append(weight * delta)
    return math.fsum(terms)


def set_derivative3(x, model: LocationScatter, j: int, k: int, l: int, T) -> float:
    """Third-order set derivative of the masked distance at ``T``.

    Alternating sum of ``md2`` over the 8 subsets of ``{j, k, l}`` joined to
    ``T``.  For a quadratic characteristic function this vanishes, which is
    why interactions stop at order two.
    """
    x = as_vector(x, model.p)
    p = model.p
    _check_enumerable(p)
    triple = validate_subset([j, k, l], p)
    if len(triple) != 3:
        raise IndexOverlap("j, k, l must be three distinct indices")
    T = validate_subset(T, p)
    if set(T) & set(triple):
        raise IndexOverlap("T must be disjoint from {j, k, l}")
    v = _masked_md2_table(x, model)
    base = frozenset(T)
    terms = []
    for size in range(4):
        for L in combinations(triple, size):
            sign = (-1) ** (3 - size)
            terms.append(sign * v(base | set(L)))
    return math.fsum(terms)
