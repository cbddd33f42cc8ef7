"""Rated extremality of finite set systems and the constructive dual certificates.

A common point of m closed sets is rated extremal of rank alpha when shifts of
size r push the sets apart inside balls of radius gamma * r^alpha.  The
verifier grid-searches those balls for common points of the shifted sets.  The
constructive procedure minimises, per rung,

    d_k(x) = [sum_i dist^2(x + a_ik; set_i)]^(1/2)
             + sqrt(m) / gamma^(1/alpha) * ||x - xbar||^(1/alpha),

reads off unit dual tuples from the projection residuals at the minimiser, and
clusters them over the finest rungs into a limit certificate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import defaults, sampling
from .errors import ExtremalityViolated, InputError, PreconditionError
from .geometry import SetOracle, as_point, sample_set_points
from .normal_cones import ConeSample, RadiusLadder, angular_distance, limiting_cone_sample


@dataclass(frozen=True)
class TranslationSchedule:
    """Shift sequences a_ik, laid out as an (m, K, n) array."""

    shifts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.shifts, dtype=float)
        if arr.ndim != 3:
            raise InputError("schedule shifts must have shape (sets, rungs, dim)")
        object.__setattr__(self, "shifts", arr)
        r = self.radii
        if np.any(r <= 0.0):
            raise InputError("schedule radii must be positive")
        if np.any(np.diff(r) >= 0.0):
            raise InputError("schedule radii must decrease strictly")

    @property
    def sets(self) -> int:
        return self.shifts.shape[0]

    @property
    def rungs(self) -> int:
        return self.shifts.shape[1]

    @property
    def dim(self) -> int:
        return self.shifts.shape[2]

    @property
    def radii(self) -> np.ndarray:
        """r_k = max_i ||a_ik||."""
        return np.linalg.norm(self.shifts, axis=2).max(axis=0)


def vertical_pair_schedule(radii: Sequence[float], dim: int = 2) -> TranslationSchedule:
    """Opposite vertical shifts (0, +r_k) and (0, -r_k) for a pair of sets."""
    radii = np.asarray(radii, dtype=float)
    up = np.zeros((radii.size, dim))
    up[:, -1] = radii
    return TranslationSchedule(np.stack([up, -up]))


def geometric_radii(count: int, base: float = 0.25, scale: float = 0.25) -> np.ndarray:
    """r_k = scale * base^(k-1), k = 1..count (default 4^-k)."""
    return scale * base ** np.arange(count)


@dataclass(frozen=True)
class RatedQuery:
    """Rank and localisation of a rated extremality query.

    alpha = 1 is accepted by the verifier (degenerate rank) but refused by the
    principle runner, whose penalty exponent 1/alpha requires alpha < 1.
    """

    alpha: float
    gamma: float
    rungs: int = 10
    grid_resolution: int = defaults.GRID_RESOLUTION

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise InputError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.gamma <= 0.0:
            raise InputError("gamma must be positive")
        if self.rungs < 1:
            raise InputError("need at least one rung")

    def ball_radius(self, r: float) -> float:
        if self.alpha == 0.0:
            return self.gamma
        return self.gamma * r**self.alpha


@dataclass(frozen=True)
class RungOutcome:
    rung: int
    radius: float
    ball_radius: float
    witness: Optional[tuple]


@dataclass(frozen=True)
class ExtremalityVerdict:
    """Grid-search verdict; one-sided (a missing witness does not disprove)."""

    per_rung: tuple
    tol: float

    @property
    def holds(self) -> bool:
        return all(o.witness is None for o in self.per_rung)

    @property
    def first_counterexample(self) -> Optional[RungOutcome]:
        for o in self.per_rung:
            if o.witness is not None:
                return o
        return None

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "tol": self.tol,
            "rungs": [
                {
                    "k": o.rung,
                    "r": o.radius,
                    "ball": o.ball_radius,
                    "witness": list(o.witness) if o.witness is not None else None,
                }
                for o in self.per_rung
            ],
        }


def _shifted_feasible(
    system: Sequence[SetOracle], shifts_k: np.ndarray, pts: np.ndarray, tol: float
) -> Optional[np.ndarray]:
    """First grid point lying in every shifted set, or None."""
    feasible = np.ones(pts.shape[0], dtype=bool)
    for oracle, a in zip(system, shifts_k):
        moved = pts + a
        viol = np.array([oracle.slack_violation(p) for p in moved])
        feasible &= viol <= tol
        if not feasible.any():
            return None
    idx = int(np.argmax(feasible))
    return pts[idx]


def verify_rated_extremality(
    system: Sequence[SetOracle],
    xbar,
    query: RatedQuery,
    schedule: TranslationSchedule,
    tol: float = defaults.TOL_FEAS_EXT,
) -> ExtremalityVerdict:
    """Search B(xbar, gamma r_k^alpha) for common points of the shifted sets.

    x belongs to set_i - a_ik iff x + a_ik belongs to set_i, so feasibility is
    tested through the unshifted oracles.
    """
    xbar = as_point(xbar)
    if len(system) != schedule.sets:
        raise InputError("schedule covers a different number of sets than supplied")
    for oracle in system:
        if not oracle.contains(xbar, defaults.TOL_FEAS):
            raise PreconditionError("base point must belong to every set")
    outcomes = []
    rungs = min(query.rungs, schedule.rungs)
    for k in range(rungs):
        r = float(schedule.radii[k])
        ball = query.ball_radius(r)
        pts = sampling.ball_grid(xbar, ball, query.grid_resolution)
        witness = _shifted_feasible(system, schedule.shifts[:, k, :], pts, tol)
        outcomes.append(
            RungOutcome(
                rung=k + 1,
                radius=r,
                ball_radius=ball,
                witness=None if witness is None else tuple(witness),
            )
        )
    return ExtremalityVerdict(per_rung=tuple(outcomes), tol=tol)


# ---------------------------------------------------------------------------
# tangential sufficient condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TangentialConfig:
    """Approximating cones and the rate dist(x - xbar; cone) <= C ||x - xbar||^(1+p)."""

    cones: tuple
    growth_constant: float
    growth_power: float
    radii: tuple = (0.5, 0.25, 0.1, 0.05)
    samples: int = 96
    tol: float = 1e-7

    def __post_init__(self):
        if self.growth_constant <= 0.0:
            raise InputError("growth constant C must be positive")
        if not (0.0 < self.growth_power < 1.0):
            raise InputError("growth power p must lie in (0, 1)")


def _check_is_cone(oracle: SetOracle, seed: int) -> None:
    origin = np.zeros(oracle.dim)
    if not oracle.contains(origin, 1e-7):
        raise InputError("approximating cone must contain the origin")
    pts = sample_set_points(oracle, origin, 1.0, 32, seed, "conecheck")
    for w in pts[:16]:
        for lam in (0.5, 2.0):
            if oracle.slack_violation(lam * w) > 1e-6 and oracle.distance(lam * w) > 1e-6:
                raise InputError("approximating set is not positively homogeneous")


def tangential_rate_check(
    system: Sequence[SetOracle],
    xbar,
    cfg: TangentialConfig,
    seed: int = 0,
) -> list[bool]:
    """Per-index verdict of the tangential rate condition (sampled)."""
    xbar = as_point(xbar)
    if len(cfg.cones) != len(system):
        raise InputError("one approximating cone per set is required")
    for cone in cfg.cones:
        _check_is_cone(cone, seed)
    verdicts = []
    for i, (oracle, cone) in enumerate(zip(system, cfg.cones)):
        ok = True
        for rho in cfg.radii:
            pts = sample_set_points(oracle, xbar, rho, cfg.samples, seed, "tangential", i)
            for x in pts:
                gap = np.linalg.norm(x - xbar)
                if gap <= 1e-12:
                    continue
                defect = cone.distance(x - xbar)
                bound = cfg.growth_constant * gap ** (1.0 + cfg.growth_power) + cfg.tol
                if defect > bound:
                    ok = False
                    break
            if not ok:
                break
        verdicts.append(ok)
    return verdicts


# ---------------------------------------------------------------------------
# constructive exact principle
# ---------------------------------------------------------------------------


@dataclass
class PrincipleCertificate:
    """Dual certificate at one rung: points, unit dual tuple, residuals."""

    rung: int
    radius: float
    nu: float
    minimizer: np.ndarray
    points: list
    duals: list
    sum_norm: float
    unit_defect: float
    cone_defects: Optional[list] = None

    def to_json(self) -> dict:
        return {
            "rung": self.rung,
            "r": self.radius,
            "nu": self.nu,
            "minimizer": self.minimizer.tolist(),
            "points": [p.tolist() for p in self.points],
            "duals": [d.tolist() for d in self.duals],
            "sum_norm": self.sum_norm,
            "unit_defect": self.unit_defect,
            "cone_defects": self.cone_defects,
        }


@dataclass
class PrincipleRun:
    certificates: list
    limit: PrincipleCertificate

    def convergence_rows(self) -> list[dict]:
        return [
            {
                "k": c.rung,
                "r_k": c.radius,
                "nu_k": c.nu,
                "sum_norm": c.sum_norm,
                "unit_defect": c.unit_defect,
            }
            for c in self.certificates
        ]


def certificate_residuals(
    cert: PrincipleCertificate, cones: Optional[Sequence[ConeSample]] = None
) -> dict:
    """Recompute residuals from the stored vectors (pure arithmetic)."""
    duals = [np.asarray(d, dtype=float) for d in cert.duals]
    total = np.sum(duals, axis=0)
    sum_norm = float(np.linalg.norm(total))
    unit_defect = float(abs(sum(float(d @ d) for d in duals) - 1.0))
    out = {"sum_norm": sum_norm, "unit_defect": unit_defect}
    if cones is not None:
        out["cone_defects"] = [_cone_defect(d, cone) for d, cone in zip(duals, cones)]
    elif cert.cone_defects is not None:
        out["cone_defects"] = list(cert.cone_defects)
    return out


def _cone_defect(dual: np.ndarray, cone: ConeSample) -> float:
    if float(np.linalg.norm(dual)) <= 1e-12:
        return 0.0
    dirs = cone.direction_array()
    if dirs.shape[0] == 0:
        return float(np.pi)
    return min(angular_distance(dual, d) for d in dirs)


def _coordinate_descent(fun, x0, step0, max_sweeps=200, min_step=1e-11, clip=None):
    x = x0.copy()
    if clip is not None:
        x = clip(x)
    best = fun(x)
    h = step0
    sweeps = 0
    while sweeps < max_sweeps and h > min_step:
        sweeps += 1
        improved = False
        for j in range(x.size):
            for sign in (1.0, -1.0):
                cand = x.copy()
                cand[j] += sign * h
                if clip is not None:
                    cand = clip(cand)
                val = fun(cand)
                if val < best - 1e-15:
                    x, best = cand, val
                    improved = True
        if not improved:
            h *= 0.5
    return x, best


def run_exact_principle(
    system: Sequence[SetOracle],
    xbar,
    query: RatedQuery,
    schedule: TranslationSchedule,
    seed: int = 0,
    cone_ladder: Optional[RadiusLadder] = None,
    limit_window: int = 3,
) -> PrincipleRun:
    """Per-rung dual certificates from the unconstrained distance minimisation.

    Raises ExtremalityViolated when the shifted sets intersect at a minimiser
    (the schedule does not separate them), and refuses alpha = 1, whose penalty
    exponent is undefined; rank-1 systems are analysed through
    search_principle_certificate instead.
    """
    xbar = as_point(xbar)
    m = len(system)
    if m < 1:
        raise InputError("need at least one set")
    if query.alpha >= 1.0:
        raise InputError(
            "the principle runner requires alpha < 1; alpha = 1 systems can fail "
            "the exact principle and are analysed via search_principle_certificate"
        )
    alpha, gamma = query.alpha, query.gamma
    cones = [
        limiting_cone_sample(s, xbar, cone_ladder or RadiusLadder(), seed=seed) for s in system
    ]

    certificates = []
    rungs = min(query.rungs, schedule.rungs)
    for k in range(rungs):
        r = float(schedule.radii[k])
        shifts_k = schedule.shifts[:, k, :]
        ball = query.ball_radius(r)

        def nu_of(x):
            return math.sqrt(
                sum(s.distance(x + a) ** 2 for s, a in zip(system, shifts_k))
            )

        if alpha == 0.0:
            # limiting form of the power penalty: hard ball constraint
            def objective(x):
                return nu_of(x)

            def clip(x):
                gap = np.linalg.norm(x - xbar)
                if gap <= gamma:
                    return x
                return xbar + (x - xbar) * (gamma / gap)

        else:
            exponent = 1.0 / alpha
            coeff = math.sqrt(m) / gamma**exponent

            def objective(x):
                return nu_of(x) + coeff * float(np.linalg.norm(x - xbar)) ** exponent

            clip = None

        seeds = [xbar]
        ring = sampling.unit_directions(xbar.size, 8, seed, "principle", k)
        seeds.extend(xbar + 0.5 * ball * d for d in ring)
        best_x, best_val = None, math.inf
        for x0 in seeds:
            x, val = _coordinate_descent(objective, np.asarray(x0), step0=max(ball / 4.0, 1e-8), clip=clip)
            if val < best_val - 1e-15:
                best_x, best_val = x, val
        x_k = best_x
        nu = nu_of(x_k)
        if nu <= defaults.TOL_FEAS:
            raise ExtremalityViolated(k + 1, nu)
        points = [s.project(x_k + a) for s, a in zip(system, shifts_k)]
        raw = [x_k + a - w for a, w in zip(shifts_k, points)]
        duals = [v / nu for v in raw]
        total = np.sum(duals, axis=0)
        cert = PrincipleCertificate(
            rung=k + 1,
            radius=r,
            nu=nu,
            minimizer=x_k,
            points=points,
            duals=duals,
            sum_norm=float(np.linalg.norm(total)),
            unit_defect=float(abs(sum(float(d @ d) for d in duals) - 1.0)),
            cone_defects=[_cone_defect(d, c) for d, c in zip(duals, cones)],
        )
        certificates.append(cert)

    window = certificates[-min(limit_window, len(certificates)):]
    centroids = []
    for i in range(m):
        centroids.append(np.mean([c.duals[i] for c in window], axis=0))
    scale = math.sqrt(sum(float(c @ c) for c in centroids))
    if scale <= 1e-15:
        raise PreconditionError("limit dual tuple degenerated to zero")
    limit_duals = [c / scale for c in centroids]
    total = np.sum(limit_duals, axis=0)
    limit = PrincipleCertificate(
        rung=0,
        radius=0.0,
        nu=0.0,
        minimizer=xbar.copy(),
        points=[xbar.copy() for _ in range(m)],
        duals=limit_duals,
        sum_norm=float(np.linalg.norm(total)),
        unit_defect=float(abs(sum(float(d @ d) for d in limit_duals) - 1.0)),
        cone_defects=[_cone_defect(d, c) for d, c in zip(limit_duals, cones)],
    )
    return PrincipleRun(certificates=certificates, limit=limit)


# ---------------------------------------------------------------------------
# residual search over sampled cones (failure analysis, e.g. rank alpha = 1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateSearch:
    """Best unit dual tuple found over sampled cone directions.

    residual = min ||sum_i u_i|| subject to u_i in the sampled cones and
    sum_i ||u_i||^2 = 1.  lower_bound certifies no tuple over the same sample
    can do better (smallest Gram eigenvalue over direction combinations).
    """

    residual: float
    lower_bound: float
    vectors: tuple
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "residual": self.residual,
            "lower_bound": self.lower_bound,
            "vectors": [list(v) for v in self.vectors],
            "degenerate": self.degenerate,
        }


def _min_quadratic_on_simplex_sphere(G: np.ndarray, grid: int = 721) -> tuple[float, np.ndarray]:
    """Minimise t' G t over the nonnegative part of the unit sphere."""
    m = G.shape[0]
    vals, vecs = np.linalg.eigh(G)
    v = vecs[:, 0]
    if np.all(v >= -1e-12) or np.all(v <= 1e-12):
        t = np.abs(v)
        t /= np.linalg.norm(t)
        return float(t @ G @ t), t
    if m == 2:
        thetas = np.linspace(0.0, np.pi / 2.0, grid)
        ts = np.column_stack([np.cos(thetas), np.sin(thetas)])
        quad = np.einsum("ij,jk,ik->i", ts, G, ts)
        i = int(np.argmin(quad))
        lo, hi = max(i - 1, 0), min(i + 1, grid - 1)
        a, b = thetas[lo], thetas[hi]
        for _ in range(60):
            third = (b - a) / 3.0
            m1, m2 = a + third, b - third
            t1 = np.array([math.cos(m1), math.sin(m1)])
            t2 = np.array([math.cos(m2), math.sin(m2)])
            if t1 @ G @ t1 <= t2 @ G @ t2:
                b = m2
            else:
                a = m1
        theta = 0.5 * (a + b)
        t = np.array([math.cos(theta), math.sin(theta)])
        return float(t @ G @ t), t
    # general m: projected gradient descent on the sphere from the flat start
    t = np.ones(m) / math.sqrt(m)
    step = 0.1
    val = float(t @ G @ t)
    for _ in range(500):
        grad = 2.0 * (G @ t)
        cand = np.maximum(t - step * grad, 0.0)
        n = np.linalg.norm(cand)
        if n <= 1e-14:
            step *= 0.5
            continue
        cand /= n
        cval = float(cand @ G @ cand)
        if cval < val - 1e-15:
            t, val = cand, cval
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return val, t


def search_principle_certificate(cones: Sequence[ConeSample], grid: int = 721) -> CertificateSearch:
    """Certified residual search for the exact-principle relationships."""
    if any(len(c.directions) == 0 for c in cones):
        raise InputError("every cone sample must be nonempty")
    m = len(cones)
    dim = len(cones[0].base)
    if m == 1:
        d = np.asarray(cones[0].directions[0])
        return CertificateSearch(
            residual=1.0, lower_bound=1.0, vectors=(tuple(d),), degenerate=True
        )
    best_val, best_vecs = math.inf, None
    lower = math.inf
    for combo in itertools.product(*[c.directions for c in cones]):
        D = np.array(combo)
        G = D @ D.T
        lower = min(lower, float(np.linalg.eigh(G)[0][0]))
        val, t = _min_quadratic_on_simplex_sphere(G, grid)
        if val < best_val:
            best_val = val
            best_vecs = t[:, None] * D
    residual = math.sqrt(max(best_val, 0.0))
    return CertificateSearch(
        residual=residual,
        lower_bound=math.sqrt(max(lower, 0.0)),
        vectors=tuple(tuple(v) for v in best_vecs),
    )
