"""Shared fixtures and independent dense oracles for the solver contracts.

The oracles assemble the stencil explicitly, pixel by pixel, and solve with
numpy's dense LU, so they share no code path with the package's matrix-free
conjugate gradient.
"""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def dense_laplacian_matrix(height: int, width: int) -> np.ndarray:
    """Mirrored-Neumann 5-point Laplacian as a dense matrix, assembled by loops."""
    n = height * width
    lap = np.zeros((n, n))
    for i in range(height):
        for j in range(width):
            p = i * width + j
            for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
                if 0 <= a < height and 0 <= b < width:
                    lap[p, a * width + b] += 1.0
                    lap[p, p] -= 1.0
    return lap


def dense_implicit_step(u_prev, mask, dirichlet, alpha):
    """Direct solve of (I - alpha*L)u = u_prev with mask pixels eliminated."""
    height, width = u_prev.shape
    system = np.eye(height * width) - alpha * dense_laplacian_matrix(height, width)
    pinned = mask.ravel()
    free = ~pinned
    rhs = u_prev.ravel()[free] - system[np.ix_(free, pinned)] @ dirichlet.ravel()[pinned]
    out = dirichlet.ravel().astype(float).copy()
    out[free] = np.linalg.solve(system[np.ix_(free, free)], rhs)
    return out.reshape(height, width)


def dense_harmonic(mask, data):
    """Direct solve of Lu = 0 on the free pixels against the pinned data."""
    height, width = data.shape
    lap = dense_laplacian_matrix(height, width)
    pinned = mask.ravel()
    free = ~pinned
    rhs = -lap[np.ix_(free, pinned)] @ data.ravel()[pinned]
    out = data.ravel().astype(float).copy()
    out[free] = np.linalg.solve(lap[np.ix_(free, free)], rhs)
    return out.reshape(height, width)


@pytest.fixture(scope="session")
def scene256():
    from picodec import synthetic_scene

    return synthetic_scene(256)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
