"""Random problem generators shared across test modules."""

from __future__ import annotations

import numpy as np

from mdshapley import LocationScatter, build_model


def random_spd(rng: np.random.Generator, p: int) -> np.ndarray:
    """A well-conditioned random covariance matrix."""
    A = rng.standard_normal((p, p))
    return A @ A.T / p + 0.5 * np.eye(p)


def random_instance(rng: np.random.Generator, p: int) -> tuple[np.ndarray, LocationScatter]:
    """A random observation together with a random model of dimension p."""
    model = build_model(rng.standard_normal(p), random_spd(rng, p))
    x = model.mu + rng.standard_normal(p) * rng.uniform(0.5, 3.0)
    return x, model


def random_subset(rng: np.random.Generator, p: int, allow_empty: bool = False) -> tuple[int, ...]:
    """A random coordinate subset, nonempty unless allowed otherwise."""
    low = 0 if allow_empty else 1
    size = int(rng.integers(low, p + 1))
    return tuple(sorted(rng.choice(p, size=size, replace=False).tolist()))
