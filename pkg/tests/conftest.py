"""Shared helpers for seeded randomized checks."""

import numpy as np


def unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def perp_pair(rng: np.random.Generator):
    """A (beta, target) pair with target orthogonal to beta."""
    beta = unit_vector(rng)
    s = np.cross(beta, rng.standard_normal(3))
    while np.linalg.norm(s) < 1e-6:
        s = np.cross(beta, rng.standard_normal(3))
    return beta, s / np.linalg.norm(s)
