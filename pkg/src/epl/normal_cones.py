"""Sampled normal cones and subdifferentials.

The limsup/liminf constructions behind generalized normals are discretised on
a geometric radius ladder: per rung, set points (for normals) or ambient
points (for subgradients) are sampled in an annulus around the base point, the
per-rung extremum is recorded, and the estimate aggregates the finest rungs.
Limiting cone directions come from the projector: normalized x - P(x) over
off-set probes, filtered for recurrence at the finest rungs and merged
angularly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import defaults, sampling
from .errors import InputError, PreconditionError
from .geometry import SetOracle, as_point


@dataclass(frozen=True)
class RadiusLadder:
    """Geometric radii rho0 * factor^j, j = 0..rungs-1, with samples per rung."""

    rho0: float = defaults.LADDER_RHO0
    factor: float = defaults.LADDER_FACTOR
    rungs: int = defaults.LADDER_RUNGS
    samples: int = defaults.LADDER_SAMPLES

    def __post_init__(self):
        if not (self.rho0 > 0.0 and 0.0 < self.factor < 1.0 and self.rungs >= 1):
            raise InputError("ladder needs rho0 > 0, factor in (0,1), rungs >= 1")
        if self.rho0 * self.factor**self.rungs <= 1e-12:
            raise InputError("ladder descends below the numerical noise floor")

    def radii(self) -> np.ndarray:
        return self.rho0 * self.factor ** np.arange(self.rungs)

    def window(self) -> int:
        return max(defaults.WINDOW_MIN, self.rungs // defaults.WINDOW_DIV)

    def key(self) -> tuple:
        return (self.rho0, self.factor, self.rungs, self.samples)


@dataclass(frozen=True)
class ConeSample:
    """Sampled normal directions at a base point (all unit length)."""

    base: tuple
    directions: tuple
    radii: tuple = ()

    def direction_array(self) -> np.ndarray:
        if not self.directions:
            return np.zeros((0, len(self.base)))
        return np.array(self.directions)

    def to_json(self) -> dict:
        return {
            "base": list(self.base),
            "directions": [list(d) for d in self.directions],
            "radii": list(self.radii),
        }


def angular_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between nonzero vectors, scale-invariant."""
    un = u / np.linalg.norm(u)
    vn = v / np.linalg.norm(v)
    return float(math.acos(min(1.0, max(-1.0, float(un @ vn)))))


def _cluster_directions(dirs: np.ndarray, tol_angle: float) -> list[np.ndarray]:
    """Greedy angular merge; centroids renormalized; deterministic order."""
    if dirs.size == 0:
        return []
    order = np.lexsort(dirs.T[::-1])[::-1]
    pool = [dirs[i] for i in order]
    clusters = []
    while pool:
        head = pool.pop(0)
        members = [head]
        rest = []
        for d in pool:
            if angular_distance(head, d) <= tol_angle:
                members.append(d)
            else:
                rest.append(d)
        pool = rest
        centroid = np.mean(members, axis=0)
        n = np.linalg.norm(centroid)
        clusters.append(centroid / n if n > 0 else head)
    return clusters


# ---------------------------------------------------------------------------
# annulus sampling of set points (cached per oracle/base/ladder/seed)
# ---------------------------------------------------------------------------

_SAMPLE_CACHE: dict = {}
_CACHE_LIMIT = 128


def _rung_set_points(
    oracle: SetOracle, base: np.ndarray, ladder: RadiusLadder, seed: int
) -> list[np.ndarray]:
    """Per rung: points of the set with 0 < ||w - base|| <= rho_j."""
    key = (oracle.cache_key(), base.tobytes(), ladder.key(), seed)
    hit = _SAMPLE_CACHE.get(key)
    if hit is not None:
        return hit
    out = []
    for j, rho in enumerate(ladder.radii()):
        dirs = sampling.unit_directions(oracle.dim, ladder.samples, seed, "rung", j)
        radii = sampling.annulus_radii(rho, ladder.factor, ladder.samples, seed, "rung", j)
        probes = base + dirs * radii[:, None]
        proj = oracle.project_many(probes)
        gaps = np.linalg.norm(proj - base, axis=1)
        keep = (gaps > 1e-13) & (gaps <= rho * (1.0 + 1e-9))
        out.append(proj[keep])
    if len(_SAMPLE_CACHE) >= _CACHE_LIMIT:
        _SAMPLE_CACHE.clear()
    _SAMPLE_CACHE[key] = out
    return out


def eps_normal_residual(
    oracle: SetOracle,
    xbar,
    xstar,
    ladder: RadiusLadder = RadiusLadder(),
    seed: int = 0,
) -> float:
    """Estimate of limsup over set points x -> xbar of <x*, x-xbar>/||x-xbar||.

    x* is accepted as an eps-normal when the returned value is <= eps + TOL_RES.
    Returns -inf when every annulus is empty (isolated base point).
    """
    xbar = as_point(xbar, oracle.dim)
    xstar = as_point(xstar, oracle.dim)
    if not oracle.contains(xbar, defaults.TOL_FEAS):
        raise PreconditionError("base point is not in the set")
    rungs = _rung_set_points(oracle, xbar, ladder, seed)
    per_rung = []
    for pts in rungs:
        if pts.shape[0] == 0:
            per_rung.append(None)
            continue
        diffs = pts - xbar
        norms = np.linalg.norm(diffs, axis=1)
        per_rung.append(float(np.max(diffs @ xstar / norms)))
    filled = [v for v in per_rung if v is not None]
    if not filled:
        return float("-inf")
    window = ladder.window()
    return max(filled[-window:])


def limiting_cone_sample(
    oracle: SetOracle,
    xbar,
    ladder: RadiusLadder = RadiusLadder(),
    seed: int = 0,
    tol_angle: float = defaults.TOL_ANGLE,
) -> ConeSample:
    """Cluster representatives of normalized x - P(x) over shrinking off-set probes.

    Only directions recurring at the two finest informative rungs survive,
    which implements the sequential outer limit at fixed resolution.
    """
    xbar = as_point(xbar, oracle.dim)
    if not oracle.contains(xbar, defaults.TOL_FEAS):
        raise PreconditionError("base point is not in the set")
    per_rung: list[np.ndarray] = []
    radii_used: list[float] = []
    for j, rho in enumerate(ladder.radii()):
        dirs = sampling.unit_directions(oracle.dim, ladder.samples, seed, "cone", j)
        probes = xbar + rho * dirs
        outside = np.array([oracle.slack_violation(p) > 0.0 for p in probes])
        if not np.any(outside):
            continue
        probes = probes[outside]
        proj = oracle.project_many(probes)
        diff = probes - proj
        norms = np.linalg.norm(diff, axis=1)
        good = norms > 1e-13
        if not np.any(good):
            continue
        per_rung.append(diff[good] / norms[good, None])
        radii_used.append(rho)
    if not per_rung:
        return ConeSample(base=tuple(xbar), directions=(), radii=())
    finest = per_rung[-1]
    if len(per_rung) >= 2:
        prev = per_rung[-2]
        keep = [
            u
            for u in finest
            if min(angular_distance(u, v) for v in prev) <= tol_angle
        ]
        finest = np.array(keep) if keep else finest
    clusters = _cluster_directions(np.asarray(finest), tol_angle)
    return ConeSample(
        base=tuple(xbar),
        directions=tuple(tuple(c) for c in clusters),
        radii=tuple(radii_used[-2:]),
    )


def cone_membership(cone: ConeSample, v, tol_angle: float = defaults.TOL_ANGLE) -> bool:
    """True iff v (up to positive scaling) lies within tol_angle of the sample."""
    v = np.asarray(v, dtype=float)
    if float(np.linalg.norm(v)) <= 1e-14:
        return True
    dirs = cone.direction_array()
    if dirs.shape[0] == 0:
        return False
    return min(angular_distance(v, d) for d in dirs) <= tol_angle


# ---------------------------------------------------------------------------
# subdifferentials of extended-real-valued functions
# ---------------------------------------------------------------------------


def _evaluator(f) -> Callable[[np.ndarray], float]:
    if hasattr(f, "evaluate"):
        return f.evaluate
    if callable(f):
        return f
    raise InputError("function oracle must be callable or expose .evaluate")


def frechet_subdiff_residual(
    f,
    xbar,
    xstar,
    ladder: RadiusLadder = RadiusLadder(),
    seed: int = 0,
) -> float:
    """Estimate of liminf_{x->xbar} (f(x) - f(xbar) - <x*, x-xbar>)/||x-xbar||.

    x* is accepted as a regular subgradient when the estimate is >= -TOL_RES.
    """
    xbar = as_point(xbar)
    xstar = as_point(xstar, xbar.size)
    ev = _evaluator(f)
    f0 = float(ev(xbar))
    if not np.isfinite(f0):
        raise PreconditionError("f is not finite at the base point")
    per_rung = []
    for j, rho in enumerate(ladder.radii()):
        dirs = sampling.unit_directions(xbar.size, ladder.samples, seed, "subdiff", j)
        radii = sampling.annulus_radii(rho, ladder.factor, ladder.samples, seed, "subdiff", j)
        pts = xbar + dirs * radii[:, None]
        vals = np.array([ev(p) for p in pts], dtype=float)
        finite = np.isfinite(vals)
        if not np.any(finite):
            per_rung.append(None)
            continue
        pts, vals = pts[finite], vals[finite]
        diffs = pts - xbar
        norms = np.linalg.norm(diffs, axis=1)
        quot = (vals - f0 - diffs @ xstar) / norms
        per_rung.append(float(np.min(quot)))
    filled = [v for v in per_rung if v is not None]
    if not filled:
        return float("inf")
    window = ladder.window()
    return min(filled[-window:])


def fermat_check(f, xbar, ladder: RadiusLadder = RadiusLadder(), seed: int = 0) -> bool:
    """True iff 0 is accepted in the regular subdifferential at xbar."""
    xbar = as_point(xbar)
    zero = np.zeros(xbar.size)
    return frechet_subdiff_residual(f, xbar, zero, ladder, seed) >= -defaults.TOL_RES
