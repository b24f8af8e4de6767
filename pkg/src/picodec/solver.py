"""Grid linear solves: implicit diffusion steps and harmonic inpainting.

Both operations pin a set of "stored" pixels to given Dirichlet data and solve
for the rest.  Pinned pixels are eliminated from the unknown set, which keeps
the reduced operator symmetric positive definite, and systems are applied
matrix-free (5-point stencil, mirrored Neumann boundary) inside a
Jacobi-preconditioned conjugate gradient loop.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import as_image

__all__ = [
    "SolveControls",
    "SolverConvergenceError",
    "as_mask",
    "mask_density",
    "neighbor_sum",
    "degree_map",
    "implicit_step",
    "harmonic_inpaint",
    "linear_diffusion_filter",
]


@dataclass(frozen=True)
class SolveControls:
    """Conjugate gradient stopping rule.

    tolerance is relative to the right-hand side norm; max_iterations of None
    means 10 * (width + height).
    """

    tolerance: float = 1e-8
    max_iterations: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.tolerance < 1:
            raise ValueError(f"tolerance must be in (0, 1), got {self.tolerance}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    def iteration_cap(self, shape: tuple[int, int]) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 10 * (shape[0] + shape[1])


class SolverConvergenceError(RuntimeError):
    """Conjugate gradient failed to reach the requested tolerance."""


def as_mask(mask, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Coerce to a 2D boolean pixel-selection array."""
    arr = np.asarray(mask)
    if arr.dtype != np.bool_:
        raise ValueError(f"mask must be boolean, got dtype {arr.dtype}")
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2D mask, got shape {arr.shape}")
    if shape is not None and arr.shape != shape:
        raise ValueError(f"dimension mismatch: mask {arr.shape} vs image {shape}")
    return arr


def mask_density(mask: np.ndarray) -> float:
    mask = as_mask(mask)
    return float(mask.sum()) / mask.size


def neighbor_sum(x: np.ndarray) -> np.ndarray:
    """Sum of the in-domain 4-neighbors of every pixel (missing neighbors count 0)."""
    s = np.zeros_like(x)
    s[1:, :] += x[:-1, :]
    s[:-1, :] += x[1:, :]
    s[:, 1:] += x[:, :-1]
    s[:, :-1] += x[:, 1:]
    return s


def degree_map(shape: tuple[int, int]) -> np.ndarray:
    """Number of in-domain neighbors per pixel (4 interior, 3 edge, 2 corner)."""
    return neighbor_sum(np.ones(shape, dtype=np.float64))


def _pcg(apply_a, b, inv_diag, tolerance, max_iterations, x0=None):
    # b, inv_diag and all iterates are zero on pinned pixels, so dot products
    # over the full grid equal dot products over the free set.
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = x0.copy()
        r = b - apply_a(x)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b)
    if float(np.linalg.norm(r)) <= tolerance * b_norm:
        return x
    z = inv_diag * r
    p = z.copy()
    rz = float(np.vdot(r, z))
    for _ in range(max_iterations):
        ap = apply_a(p)
        step = rz / float(np.vdot(p, ap))
        x += step * p
        r -= step * ap
        if float(np.linalg.norm(r)) <= tolerance * b_norm:
            return x
        z = inv_diag * r
        rz_next = float(np.vdot(r, z))
        p = z + (rz_next / rz) * p
        rz = rz_next
    raise SolverConvergenceError(
        f"no convergence within {max_iterations} iterations "
        f"(residual {float(np.linalg.norm(r)) / b_norm:.3e} of target {tolerance:.3e})"
    )


def implicit_step(
    u_prev: np.ndarray,
    mask: np.ndarray,
    dirichlet: np.ndarray,
    alpha: float,
    controls: SolveControls | None = None,
) -> np.ndarray:
    """One backward Euler step of size alpha with pinned pixels.

    Free pixels solve u - alpha*Lu = u_prev where L is the mirrored-Neumann
    5-point Laplacian; pixels under the mask return the Dirichlet data exactly.
    An empty mask is a pure diffusion step, a full mask returns the data.
    """
    u_prev = as_image(u_prev)
    dirichlet = as_image(dirichlet)
    if dirichlet.shape != u_prev.shape:
        raise ValueError(f"dimension mismatch: {u_prev.shape} vs {dirichlet.shape}")
    mask = as_mask(mask, u_prev.shape)
    if not np.isfinite(alpha) or alpha <= 0:
        raise ValueError(f"alpha must be finite and > 0, got {alpha}")
    controls = controls or SolveControls()
    if mask.all():
        return dirichlet.copy()

    free = ~mask
    deg = degree_map(u_prev.shape)
    pinned = np.where(mask, dirichlet, 0.0)
    b = np.where(free, u_prev + alpha * neighbor_sum(pinned), 0.0)
    diag = 1.0 + alpha * deg
    inv_diag = np.where(free, 1.0 / diag, 0.0)

    def apply_a(x):
        return np.where(free, diag * x - alpha * neighbor_sum(x), 0.0)

    x = _pcg(apply_a, b, inv_diag, controls.tolerance, controls.iteration_cap(u_prev.shape))
    return np.where(mask, dirichlet, x)


def harmonic_inpaint(
    mask: np.ndarray,
    data: np.ndarray,
    controls: SolveControls | None = None,
    initial_guess: np.ndarray | None = None,
) -> np.ndarray:
    """Fill the unmasked pixels with the discrete harmonic extension of the data.

    Free pixels solve Lu = 0 against Dirichlet values on the mask.  The initial
    guess only warm-starts the iteration; the result matches a cold start to
    the solver tolerance.
    """
    data = as_image(data)
    mask = as_mask(mask, data.shape)
    if not mask.any():
        raise ValueError("underdetermined: no Dirichlet data")
    controls = controls or SolveControls()
    if mask.all():
        return data.copy()

    free = ~mask
    deg = degree_map(data.shape)
    pinned = np.where(mask, data, 0.0)
    b = np.where(free, neighbor_sum(pinned), 0.0)
    inv_diag = np.where(free, 1.0 / deg, 0.0)

    def apply_a(x):
        return np.where(free, deg * x - neighbor_sum(x), 0.0)

    x0 = None
    if initial_guess is not None:
        x0 = np.where(free, as_image(initial_guess), 0.0)
    x = _pcg(
        apply_a, b, inv_diag, controls.tolerance, controls.iteration_cap(data.shape), x0
    )
    return np.where(mask, data, x)


def linear_diffusion_filter(
    f: np.ndarray,
    eta: float,
    steps: int = 10,
    controls: SolveControls | None = None,
) -> np.ndarray:
    """Homogeneous Neumann heat flow to total time eta, split into implicit steps."""
    f = as_image(f)
    if not np.isfinite(eta) or eta <= 0:
        raise ValueError(f"eta must be finite and > 0, got {eta}")
    if steps < 1:
        raise ValueError("steps must be positive")
    empty = np.zeros(f.shape, dtype=bool)
    zeros = np.zeros_like(f)
    u = f
    for _ in range(steps):
        u = implicit_step(u, empty, zeros, eta / steps, controls)
    return u
