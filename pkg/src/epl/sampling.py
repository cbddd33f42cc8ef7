"""Deterministic seeded sampling helpers.

Every stochastic choice in the toolkit flows through :func:`rng_for`, which
derives an independent generator from a scenario seed and a tag tuple such as
``(module, op, rung, index)``.  Results are therefore independent of scheduling
and worker count.
"""

from __future__ import annotations

import hashlib
import itertools

import numpy as np

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Generator keyed by (seed, *tags); stable across platforms and runs."""
    payload = "|".join([str(int(seed)), *map(str, tags)]).encode()
    digest = hashlib.sha256(payload).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def unit_directions(dim: int, count: int, seed: int, *tags) -> np.ndarray:
    """(count, dim) array of unit directions.

    In the plane a golden-angle fan with a seed-derived phase gives a
    low-discrepancy cover of the circle; in higher dimensions seeded Gaussian
    directions are used.
    """
    rng = rng_for(seed, "dirs", dim, count, *tags)
    if dim == 1:
        signs = np.ones(count)
        signs[1::2] = -1.0
        return signs[:, None]
    if dim == 2:
        phase = rng.uniform(0.0, 2.0 * np.pi)
        angles = phase + _GOLDEN_ANGLE * np.arange(count)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    vecs = rng.normal(size=(count, dim))
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return vecs / norms


def evenly_spaced_directions(count: int) -> np.ndarray:
    """(count, 2) unit vectors at equally spaced angles, starting at angle 0."""
    angles = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


def ball_grid(center: np.ndarray, radius: float, resolution: int) -> np.ndarray:
    """Regular grid over the bounding box of B(center, radius), filtered to the ball.

    Rows are in lexicographic axis order, so "first witness found" is
    deterministic.  For dimensions above 3 the cartesian grid explodes; a
    seeded uniform fill of the ball is used instead.
    """
    center = np.asarray(center, dtype=float)
    dim = center.size
    if resolution < 2:
        return center[None, :]
    if resolution**dim > 250_000:
        rng = rng_for(0, "ball_grid", dim, resolution)
        count = 200_000
        pts = rng.normal(size=(count, dim))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        radii = radius * rng.uniform(0.0, 1.0, size=count) ** (1.0 / dim)
        return center + pts * radii[:, None]
    axes = [np.linspace(c - radius, c + radius, resolution) for c in center]
    pts = np.array(list(itertools.product(*axes)))
    keep = np.linalg.norm(pts - center, axis=1) <= radius * (1.0 + 1e-12)
    pts = pts[keep]
    if pts.size == 0:
        pts = center[None, :]
    return pts


def annulus_radii(rho_outer: float, factor: float, count: int, seed: int, *tags) -> np.ndarray:
    """Radii filling the annulus (factor*rho_outer, rho_outer], seed-derived."""
    rng = rng_for(seed, "annulus", rho_outer, count, *tags)
    lo = factor * rho_outer
    return lo + (rho_outer - lo) * rng.uniform(0.0, 1.0, size=count)
