"""Closed subsets of R^n behind a uniform oracle: membership, nearest-point
projection, distance, translation.

The catalog is parametric and example-driven: halfspaces, balls, boxes,
polyhedra, epigraphs/hypographs of registered scalar curves, translates,
finite intersections and products.  Projections are closed-form wherever the
family admits one; graph families without closed-form stationary points use a
dense boundary grid followed by ternary refinement.  Multivalued projections
are resolved deterministically: among minimizers, the lexicographically
largest coordinate vector is returned.
"""

from __future__ import annotations

import itertools
import math
from typing import Optional, Sequence

import numpy as np

from . import defaults
from .errors import DimensionMismatchError, InputError, NumericFailure
from .functions import ScalarCurve, curve_from_spec, max_curve, min_curve, neg_abs

_GRID_SAMPLES = 10_001
_REFINE_STEPS = 60
_TIE_REL = 1e-9


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Validate and convert a point: 1-D, finite, optionally of dimension ``dim``."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise InputError(f"expected a flat coordinate vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"point has non-finite coordinates: {arr}")
    if dim is not None and arr.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {arr.size}")
    return arr


class SetOracle:
    """Base oracle for a nonempty closed subset of R^n.

    Oracles are immutable after construction and all operations are pure, so
    instances are safe to share across workers.  Subclasses implement
    ``_project`` and ``slack_violation``; everything else derives from those.
    """

    dim: int
    convex: bool = False

    # -- membership ---------------------------------------------------------

    def slack_violation(self, x: np.ndarray) -> float:
        """Nonnegative defining-inequality slack: 0 iff x is in the set.

        For closed-form families this equals the Euclidean distance; for graph
        families it is the vertical gap, an upper bound on the distance.
        """
        raise NotImplementedError

    def contains(self, x, tol: float = defaults.TOL_FEAS) -> bool:
        """True iff the Euclidean distance from x to the set is at most tol."""
        x = as_point(x, self.dim)
        if self.slack_violation(x) <= tol:
            return True
        return self.distance(x) <= tol

    # -- projection ---------------------------------------------------------

    def _project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        """A nearest point of the set to x (deterministic selection)."""
        x = as_point(x, self.dim)
        if self.slack_violation(x) == 0.0:
            return x.copy()
        return self._project(x)

    def project_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.array([self.project(row) for row in X])

    def distance(self, x) -> float:
        x = as_point(x, self.dim)
        if self.slack_violation(x) == 0.0:
            return 0.0
        return float(np.linalg.norm(x - self.project(x)))

    # -- structure ----------------------------------------------------------

    def translate(self, shift) -> "SetOracle":
        """The set {w - shift : w in set}; projections are exactly equivariant."""
        return Translated(self, shift)

    def normal_directions_at(self, x, tol: float = 1e-7) -> Optional[list[np.ndarray]]:
        """Unit generators of the analytic normal cone at a boundary point x.

        Returns [] at interior points and None when the family has no analytic
        cone; callers must then fall back to projection-direction sampling.
        """
        return None

    def spec(self) -> dict:
        raise NotImplementedError

    def cache_key(self) -> str:
        return repr(self.spec())

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()})"


# ---------------------------------------------------------------------------
# closed-form families
# ---------------------------------------------------------------------------


class Halfspace(SetOracle):
    """{x : <normal, x> <= offset}."""

    convex = True

    def __init__(self, normal, offset: float):
        self.normal = as_point(normal)
        if np.linalg.norm(self.normal) == 0.0:
            raise InputError("halfspace normal must be nonzero")
        self.offset = float(offset)
        self.dim = self.normal.size
        self._nn = float(self.normal @ self.normal)
        self._norm = math.sqrt(self._nn)

    def slack_violation(self, x):
        return max(0.0, (float(self.normal @ x) - self.offset) / self._norm)

    def _project(self, x):
        excess = (float(self.normal @ x) - self.offset) / self._nn
        return x - excess * self.normal

    def project_many(self, X):
        X = np.asarray(X, dtype=float)
        excess = np.maximum(0.0, (X @ self.normal - self.offset) / self._nn)
        return X - excess[:, None] * self.normal

    def normal_directions_at(self, x, tol: float = 1e-7):
        gap = abs(float(self.normal @ x) - self.offset) / self._norm
        if gap <= tol:
            return [self.normal / self._norm]
        return []

    def spec(self):
        return {"family": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


class Ball(SetOracle):
    """Closed Euclidean ball."""

    convex = True

    def __init__(self, center, radius: float):
        self.center = as_point(center)
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise InputError("ball radius must be positive")
        self.dim = self.center.size

    def slack_violation(self, x):
        return max(0.0, float(np.linalg.norm(x - self.center)) - self.radius)

    def _project(self, x):
        d = x - self.center
        return self.center + d * (self.radius / float(np.linalg.norm(d)))

    def project_many(self, X):
        X = np.asarray(X, dtype=float)
        d = X - self.center
        norms = np.linalg.norm(d, axis=1)
        scale = np.where(norms > self.radius, self.radius / np.maximum(norms, 1e-300), 1.0)
        return self.center + d * scale[:, None]

    def normal_directions_at(self, x, tol: float = 1e-7):
        gap = abs(float(np.linalg.norm(x - self.center)) - self.radius)
        if gap <= tol:
            return [(x - self.center) / float(np.linalg.norm(x - self.center))]
        return []

    def spec(self):
        return {"family": "ball", "center": self.center.tolist(), "radius": self.radius}


class Box(SetOracle):
    """Axis-aligned box; bounds may be infinite."""

    convex = True

    def __init__(self, lo, hi):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise InputError("box bounds must be equal-length vectors")
        if np.any(self.lo > self.hi):
            raise InputError("box has lo > hi")
        self.dim = self.lo.size

    def slack_violation(self, x):
        return float(np.linalg.norm(x - np.clip(x, self.lo, self.hi)))

    def _project(self, x):
        return np.clip(x, self.lo, self.hi)

    def project_many(self, X):
        return np.clip(np.asarray(X, dtype=float), self.lo, self.hi)

    def normal_directions_at(self, x, tol: float = 1e-7):
        gens = []
        for j in range(self.dim):
            if np.isfinite(self.hi[j]) and abs(x[j] - self.hi[j]) <= tol:
                e = np.zeros(self.dim)
                e[j] = 1.0
                gens.append(e)
            if np.isfinite(self.lo[j]) and abs(x[j] - self.lo[j]) <= tol:
                e = np.zeros(self.dim)
                e[j] = -1.0
                gens.append(e)
        return gens

    def spec(self):
        enc = lambda v: [None if not np.isfinite(c) else float(c) for c in v]
        return {"family": "box", "lo": enc(self.lo), "hi": enc(self.hi)}


class Polyhedron(SetOracle):
    """Finite intersection of halfspaces; projection by Dykstra's scheme."""

    convex = True

    def __init__(self, halfspaces: Sequence[Halfspace]):
        if not halfspaces:
            raise InputError("polyhedron needs at least one halfspace")
        dims = {h.dim for h in halfspaces}
        if len(dims) != 1:
            raise DimensionMismatchError("halfspaces of mixed dimension")
        self.halfspaces = list(halfspaces)
        self.dim = self.halfspaces[0].dim

    def slack_violation(self, x):
        return max(h.slack_violation(x) for h in self.halfspaces)

    def _project(self, x):
        return _dykstra(self.halfspaces, x)

    def normal_directions_at(self, x, tol: float = 1e-7):
        gens = []
        for h in self.halfspaces:
            gens.extend(h.normal_directions_at(x, tol))
        return gens

    def spec(self):
        return {
            "family": "polyhedron",
            "halfspaces": [
                {"normal": h.normal.tolist(), "offset": h.offset} for h in self.halfspaces
            ],
        }


def _dykstra(members: Sequence[SetOracle], x: np.ndarray, iters: int = 1000) -> np.ndarray:
    """Dykstra alternating projections; exact in the limit for convex members."""
    y = x.copy()
    corrections = [np.zeros_like(x) for _ in members]
    for _ in range(iters):
        start = y.copy()
        for i, member in enumerate(members):
            z = y + corrections[i]
            y = member.project(z)
            corrections[i] = z - y
        if float(np.linalg.norm(y - start)) < 1e-13:
            break
    else:
        if max(m.slack_violation(y) for m in members) > 1e-8:
            raise NumericFailure("Dykstra projection did not converge", best=y)
    return y


# ---------------------------------------------------------------------------
# graph families (epigraphs / hypographs of scalar curves in R^2)
# ---------------------------------------------------------------------------


def _refine_minimum(dist2, lo: float, hi: float) -> float:
    """Ternary search for the minimizer of dist2 on [lo, hi]."""
    a, b = lo, hi
    for _ in range(_REFINE_STEPS):
        third = (b - a) / 3.0
        m1, m2 = a + third, b - third
        if dist2(m1) <= dist2(m2):
            b = m2
        else:
            a = m1
    return 0.5 * (a + b)


def _graph_candidates(curve: ScalarCurve, p: float, q: float) -> np.ndarray:
    """Candidate abscissae of nearest graph points to (p, q)."""
    if curve.stationary_candidates is not None:
        return np.asarray(curve.stationary_candidates(p, q), dtype=float)
    half_width = max(2.0 * math.hypot(p, q), 1.0)
    grid = np.linspace(p - half_width, p + half_width, _GRID_SAMPLES)
    vals = curve.value(grid)
    d2 = (grid - p) ** 2 + (vals - q) ** 2
    best = float(d2.min())
    window = best * (1.0 + 1e-6) + 1e-12
    interior = np.zeros(grid.size, dtype=bool)
    interior[1:-1] = (d2[1:-1] <= d2[:-2]) & (d2[1:-1] <= d2[2:])
    interior[0] = d2[0] <= d2[1]
    interior[-1] = d2[-1] <= d2[-2]
    idx = np.nonzero(interior & (d2 <= window))[0]

    def dist2(s):
        v = float(curve.value(np.array([s]))[0])
        return (s - p) ** 2 + (v - q) ** 2

    out = []
    for i in idx:
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, grid.size - 1)]
        out.append(_refine_minimum(dist2, lo, hi))
    return np.asarray(out, dtype=float)


def _pick_lexmax(points: np.ndarray, dists: np.ndarray) -> np.ndarray:
    """Among minimizers (within a relative tie band) return the lex-largest point."""
    best = float(dists.min())
    tie = dists <= best * (1.0 + _TIE_REL) + 1e-15
    tied = points[tie]
    order = np.lexsort(tied.T[::-1])
    return tied[order[-1]]


class Epigraph1d(SetOracle):
    """{(s, t) in R^2 : t >= f(s)} for a registered scalar curve f."""

    def __init__(self, curve: ScalarCurve):
        self.curve = curve
        self.dim = 2
        self.convex = curve.convex

    def slack_violation(self, x):
        return max(0.0, float(self.curve.value(np.array([x[0]]))[0]) - x[1])

    def _graph_project(self, x):
        p, q = float(x[0]), float(x[1])
        ss = _graph_candidates(self.curve, p, q)
        if ss.size == 0:
            raise NumericFailure("no projection candidates on boundary grid", best=x)
        ws = np.column_stack([ss, self.curve.value(ss)])
        dists = np.linalg.norm(ws - x, axis=1)
        return _pick_lexmax(ws, dists)

    _project = _graph_project

    def normal_directions_at(self, x, tol: float = 1e-7):
        s, t = float(x[0]), float(x[1])
        f = float(self.curve.value(np.array([s]))[0])
        if t > f + tol:
            return []
        if self.curve.name == "neg_abs":
            if abs(s) <= tol:
                return [
                    np.array([1.0, -1.0]) / math.sqrt(2.0),
                    np.array([-1.0, -1.0]) / math.sqrt(2.0),
                ]
            slope = -1.0 if s > 0 else 1.0
            d = np.array([slope, -1.0])
            return [d / np.linalg.norm(d)]
        if self.curve.derivative is None:
            return None
        g = self.curve.derivative(s)
        if g is None:
            return None
        d = np.array([g, -1.0])
        return [d / np.linalg.norm(d)]

    def spec(self):
        return {"family": "epigraph1d", **self.curve.spec()}


class Hypograph1d(SetOracle):
    """{(s, t) in R^2 : t <= f(s)}."""

    def __init__(self, curve: ScalarCurve):
        self.curve = curve
        self.dim = 2
        self.convex = curve.name in ("zero",) or False

    def slack_violation(self, x):
        return max(0.0, x[1] - float(self.curve.value(np.array([x[0]]))[0]))

    _project = Epigraph1d._graph_project

    def normal_directions_at(self, x, tol: float = 1e-7):
        s, t = float(x[0]), float(x[1])
        f = float(self.curve.value(np.array([s]))[0])
        if t < f - tol:
            return []
        if self.curve.derivative is None:
            return None
        g = self.curve.derivative(s)
        if g is None:
            return None
        d = np.array([-g, 1.0])
        return [d / np.linalg.norm(d)]

    def spec(self):
        return {"family": "hypograph1d", **self.curve.spec()}


def negnorm_epigraph() -> Epigraph1d:
    """epi(-|.|) in R^2 (nonconvex; closed-form projection via branch lines)."""
    return Epigraph1d(neg_abs())


def halfplane_product(sign: str) -> Box:
    """R x R_- for sign="lower", R x R_+ for sign="upper"."""
    inf = float("inf")
    if sign == "lower":
        return Box([-inf, -inf], [inf, 0.0])
    if sign == "upper":
        return Box([-inf, 0.0], [inf, inf])
    raise InputError(f"halfplane_product sign must be 'lower' or 'upper', got {sign!r}")


def whole_space(dim: int) -> Box:
    inf = float("inf")
    return Box([-inf] * dim, [inf] * dim)


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


class Translated(SetOracle):
    """{w - shift : w in inner}.

    All queries are answered through the inner oracle at x + shift, so
    translation equivariance of distances holds exactly, bit for bit.
    """

    def __init__(self, inner: SetOracle, shift):
        self.inner = inner
        self.shift = as_point(shift, inner.dim)
        self.dim = inner.dim
        self.convex = inner.convex

    def slack_violation(self, x):
        return self.inner.slack_violation(x + self.shift)

    def _project(self, x):
        return self.inner.project(x + self.shift) - self.shift

    def project_many(self, X):
        return self.inner.project_many(np.asarray(X, dtype=float) + self.shift) - self.shift

    def distance(self, x):
        return self.inner.distance(as_point(x, self.dim) + self.shift)

    def normal_directions_at(self, x, tol: float = 1e-7):
        return self.inner.normal_directions_at(as_point(x, self.dim) + self.shift, tol)

    def spec(self):
        return {"family": "translated", "shift": self.shift.tolist(), "inner": self.inner.spec()}


class IntersectionSet(SetOracle):
    """Finite intersection of catalog sets.

    Exact projection is available when every member is convex (Dykstra).
    Intersections of epigraphs/hypographs are rewritten as a single graph set
    by :func:`intersection` before reaching this class.
    """

    def __init__(self, members: Sequence[SetOracle]):
        if not members:
            raise InputError("intersection needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise DimensionMismatchError("intersection members of mixed dimension")
        self.members = list(members)
        self.dim = self.members[0].dim
        self.convex = all(m.convex for m in members)

    def slack_violation(self, x):
        return max(m.slack_violation(x) for m in self.members)

    def _project(self, x):
        if not self.convex:
            raise InputError(
                "exact projection onto a nonconvex intersection is not supported; "
                "rewrite the set as a single graph family"
            )
        return _dykstra(self.members, x)

    def feasibility_point(self, x, iters: int = 60) -> np.ndarray:
        """A nearby point of the intersection (not necessarily nearest).

        Used by overlap machinery where only feasibility matters.  Falls back
        to cyclic alternating projections for nonconvex members.
        """
        x = as_point(x, self.dim)
        if self.slack_violation(x) == 0.0:
            return x.copy()
        if self.convex:
            return _dykstra(self.members, x)
        y = x.copy()
        for _ in range(iters):
            for m in self.members:
                y = m.project(y)
            if self.slack_violation(y) <= defaults.TOL_FEAS:
                break
        return y

    def normal_directions_at(self, x, tol: float = 1e-7):
        gens: list[np.ndarray] = []
        for m in self.members:
            g = m.normal_directions_at(x, tol)
            if g is None:
                return None
            gens.extend(g)
        return gens

    def spec(self):
        return {"family": "intersection", "members": [m.spec() for m in self.members]}


def intersection(members: Sequence[SetOracle]) -> SetOracle:
    """Intersection with exact graph rewrites where possible."""
    members = list(members)
    if len(members) == 1:
        return members[0]
    if all(isinstance(m, Epigraph1d) for m in members):
        return Epigraph1d(max_curve([m.curve for m in members]))
    if all(isinstance(m, Hypograph1d) for m in members):
        return Hypograph1d(min_curve([m.curve for m in members]))
    return IntersectionSet(members)


class ProductSet(SetOracle):
    """Cartesian product; projection splits coordinatewise."""

    def __init__(self, members: Sequence[SetOracle]):
        if not members:
            raise InputError("product needs at least one member")
        self.members = list(members)
        self.dim = sum(m.dim for m in members)
        self.convex = all(m.convex for m in members)
        self._offsets = np.cumsum([0] + [m.dim for m in members])

    def _split(self, x):
        return [x[self._offsets[i] : self._offsets[i + 1]] for i in range(len(self.members))]

    def slack_violation(self, x):
        return max(m.slack_violation(part) for m, part in zip(self.members, self._split(x)))

    def _project(self, x):
        return np.concatenate(
            [m.project(part) for m, part in zip(self.members, self._split(x))]
        )

    def normal_directions_at(self, x, tol: float = 1e-7):
        gens = []
        for i, (m, part) in enumerate(zip(self.members, self._split(x))):
            g = m.normal_directions_at(part, tol)
            if g is None:
                return None
            for v in g:
                full = np.zeros(self.dim)
                full[self._offsets[i] : self._offsets[i + 1]] = v
                gens.append(full)
        return gens

    def spec(self):
        return {"family": "product", "members": [m.spec() for m in self.members]}


# ---------------------------------------------------------------------------
# module-level operations and the JSON catalog
# ---------------------------------------------------------------------------


def contains(oracle: SetOracle, x, tol: float = defaults.TOL_FEAS) -> bool:
    return oracle.contains(x, tol)


def project(oracle: SetOracle, x) -> np.ndarray:
    return oracle.project(x)


def distance(oracle: SetOracle, x) -> float:
    return oracle.distance(x)


def translate(oracle: SetOracle, shift) -> SetOracle:
    return oracle.translate(shift)


def oracle_from_spec(spec: dict) -> SetOracle:
    """Build a catalog set from its tagged JSON form."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise InputError(f"set spec must be a dict with a 'family' tag, got {spec!r}")
    family = spec["family"]
    rest = {k: v for k, v in spec.items() if k != "family"}
    try:
        if family == "halfspace":
            return Halfspace(rest["normal"], rest["offset"])
        if family == "ball":
            return Ball(rest["center"], rest["radius"])
        if family == "box":
            dec = lambda v, sign: [sign * float("inf") if c is None else float(c) for c in v]
            return Box(dec(rest["lo"], -1.0), dec(rest["hi"], +1.0))
        if family == "polyhedron":
            return Polyhedron([Halfspace(h["normal"], h["offset"]) for h in rest["halfspaces"]])
        if family == "epigraph1d":
            return Epigraph1d(curve_from_spec(rest))
        if family == "hypograph1d":
            return Hypograph1d(curve_from_spec(rest))
        if family == "negnorm_epigraph":
            return negnorm_epigraph()
        if family == "halfplane_product":
            return halfplane_product(rest["sign"])
        if family == "translated":
            return Translated(oracle_from_spec(rest["inner"]), rest["shift"])
        if family == "intersection":
            return intersection([oracle_from_spec(m) for m in rest["members"]])
        if family == "product":
            return ProductSet([oracle_from_spec(m) for m in rest["members"]])
    except KeyError as exc:
        raise InputError(f"set spec for family {family!r} lacks field {exc}") from exc
    raise InputError(f"unknown set family {family!r}")


def sample_set_points(
    oracle: SetOracle,
    center: np.ndarray,
    radius: float,
    count: int,
    seed: int,
    *tags,
) -> np.ndarray:
    """Points of the set within B(center, radius): grid members plus projected probes."""
    from . import sampling

    center = as_point(center, oracle.dim)
    pts = []
    res = max(5, int(round(count**0.5)))
    grid = sampling.ball_grid(center, radius, res)
    inside = np.array([oracle.slack_violation(p) <= defaults.TOL_FEAS for p in grid])
    pts.append(grid[inside])
    dirs = sampling.unit_directions(oracle.dim, count, seed, "setpts", *tags)
    radii = sampling.annulus_radii(radius, 0.05, count, seed, "setpts", *tags)
    probes = center + dirs * radii[:, None]
    proj = oracle.project_many(probes)
    keep = np.linalg.norm(proj - center, axis=1) <= radius * (1.0 + 1e-9)
    pts.append(proj[keep])
    return np.vstack(pts)
