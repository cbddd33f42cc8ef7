"""Scalar curves whose epigraphs and hypographs populate the set catalog.

Each curve knows how to evaluate itself (vectorized), optionally its
derivative, and optionally the closed-form stationary abscissae of the squared
distance from an external point to its graph.  Curves without a closed form
fall back to the generic grid-plus-refinement projector in
:mod:`epl.geometry`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InputError


def depressed_cubic_roots(p: float, q: float) -> np.ndarray:
    """Real roots of t^3 + p t + q = 0 (1 to 3 of them)."""
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0.0:
        s = math.sqrt(disc)
        root = np.cbrt(-q / 2.0 + s) + np.cbrt(-q / 2.0 - s)
        return np.array([root])
    if p == 0.0 and q == 0.0:
        return np.array([0.0])
    # three real roots, trigonometric form (p < 0 here)
    r = math.sqrt(-p / 3.0)
    arg = min(1.0, max(-1.0, -q / (2.0 * r**3)))
    theta = math.acos(arg)
    ks = np.array([0.0, 1.0, 2.0])
    return 2.0 * r * np.cos((theta - 2.0 * np.pi * ks) / 3.0)


@dataclass(frozen=True)
class ScalarCurve:
    """A scalar function s -> f(s) on the line.

    Attributes:
        name: registry identifier used in scenario JSON.
        value: vectorized evaluator.
        derivative: optional evaluator of f'.
        convex: whether f is convex on R.
        stationary_candidates: optional map (p, q) -> candidate abscissae for
            the nearest graph point to (p, q); None means "use grid search".
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[float], float]] = None
    convex: bool = False
    stationary_candidates: Optional[Callable[[float, float], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def __call__(self, s):
        return self.value(np.asarray(s, dtype=float))

    def spec(self) -> dict:
        return {"function": self.name, **self.params}


def _parabola_candidates(p: float, q: float) -> np.ndarray:
    # stationary points of (s-p)^2 + (s^2-q)^2: 2s^3 + (1-2q)s - p = 0
    return depressed_cubic_roots((1.0 - 2.0 * q) / 2.0, -p / 2.0)


def _neg_parabola_candidates(p: float, q: float) -> np.ndarray:
    # stationary points of (s-p)^2 + (-s^2-q)^2: 2s^3 + (1+2q)s - p = 0
    return depressed_cubic_roots((1.0 + 2.0 * q) / 2.0, -p / 2.0)


def parabola() -> ScalarCurve:
    return ScalarCurve(
        name="parabola",
        value=lambda s: s**2,
        derivative=lambda s: 2.0 * s,
        convex=True,
        stationary_candidates=_parabola_candidates,
    )


def neg_parabola() -> ScalarCurve:
    return ScalarCurve(
        name="neg_parabola",
        value=lambda s: -(s**2),
        derivative=lambda s: -2.0 * s,
        convex=False,
        stationary_candidates=_neg_parabola_candidates,
    )


def k_m_parabola(k: int, m: int) -> ScalarCurve:
    """One-sided power parabola: k^m s^2 for s >= 0, 0 for s < 0 (convex, C^1)."""
    if k < 1 or m < 1:
        raise InputError(f"k_m_parabola needs k, m >= 1, got k={k}, m={m}")
    scale = float(k) ** m

    def value(s):
        s = np.asarray(s, dtype=float)
        return np.where(s > 0.0, scale * s**2, 0.0)

    def derivative(s):
        return 2.0 * scale * s if s > 0.0 else 0.0

    def candidates(p, q):
        # right branch K s^2: 2K^2 s^3 + (1-2Kq)s - p = 0, clamped to s >= 0
        right = depressed_cubic_roots(
            (1.0 - 2.0 * scale * q) / (2.0 * scale**2), -p / (2.0 * scale**2)
        )
        right = right[right >= 0.0]
        # left flat branch: nearest abscissa, plus the knot
        return np.concatenate([right, [min(p, 0.0), 0.0]])

    return ScalarCurve(
        name="k_m_parabola",
        value=value,
        derivative=derivative,
        convex=True,
        stationary_candidates=candidates,
        params={"k": int(k), "m": int(m)},
    )


def neg_abs() -> ScalarCurve:
    def candidates(p, q):
        # branches t = -s (s >= 0) and t = s (s <= 0), plus the corner
        return np.array([max((p - q) / 2.0, 0.0), min((p + q) / 2.0, 0.0), 0.0])

    return ScalarCurve(
        name="neg_abs",
        value=lambda s: -np.abs(s),
        derivative=None,
        convex=False,
        stationary_candidates=candidates,
    )


def abs_curve() -> ScalarCurve:
    def candidates(p, q):
        return np.array([max((p + q) / 2.0, 0.0), min((p - q) / 2.0, 0.0), 0.0])

    return ScalarCurve(
        name="abs",
        value=lambda s: np.abs(s),
        derivative=None,
        convex=True,
        stationary_candidates=candidates,
    )


def zero_curve() -> ScalarCurve:
    return ScalarCurve(
        name="zero",
        value=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        derivative=lambda s: 0.0,
        convex=True,
        stationary_candidates=lambda p, q: np.array([p]),
    )


def xsin_inv() -> ScalarCurve:
    """s * sin(1/s) with value 0 at s = 0."""

    def value(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(s != 0.0, s * np.sin(np.divide(1.0, s, where=s != 0.0)), 0.0)
        return out

    def derivative(s):
        if s == 0.0:
            return None
        return math.sin(1.0 / s) - math.cos(1.0 / s) / s

    return ScalarCurve(name="xsin_inv", value=value, derivative=derivative, convex=False)


def clipped_xsin() -> ScalarCurve:
    """min(0, s sin(1/s)): the upper boundary of (R x R_-) \\ int epi(x sin(1/x))."""
    base = xsin_inv()

    def value(s):
        return np.minimum(0.0, base.value(s))

    return ScalarCurve(name="clipped_xsin", value=value, convex=False)


def log_exponent_dip() -> ScalarCurve:
    """-|s|^(1 + 1/ln^2|s|) with value 0 at s = 0.

    Near the origin the magnitude behaves like |s| * exp(1/ln|s|), so the dip
    below zero decays slower than |s|^(1+p) for every p > 0.
    """

    def value(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        out = np.zeros_like(a)
        mask = (a > 0.0) & (a != 1.0)
        am = a[mask]
        out[mask] = -np.power(am, 1.0 + 1.0 / np.log(am) ** 2)
        out[a == 1.0] = -1.0
        return out

    return ScalarCurve(name="log_exponent_dip", value=value, convex=False)


def max_curve(curves: list[ScalarCurve]) -> ScalarCurve:
    """Pointwise maximum.  Collapses same-m one-sided power parabolas exactly."""
    if not curves:
        raise InputError("max_curve needs at least one curve")
    if len(curves) == 1:
        return curves[0]
    if all(c.name == "k_m_parabola" for c in curves) and len({c.params["m"] for c in curves}) == 1:
        k_top = max(c.params["k"] for c in curves)
        m = curves[0].params["m"]
        return k_m_parabola(k_top, m)

    def value(s):
        vals = np.stack([c.value(s) for c in curves])
        return vals.max(axis=0)

    return ScalarCurve(
        name="max",
        value=value,
        convex=all(c.convex for c in curves),
        params={"members": [c.spec() for c in curves]},
    )


def min_curve(curves: list[ScalarCurve]) -> ScalarCurve:
    """Pointwise minimum of curves (for intersections of hypographs)."""
    if not curves:
        raise InputError("min_curve needs at least one curve")
    if len(curves) == 1:
        return curves[0]

    def value(s):
        vals = np.stack([c.value(s) for c in curves])
        return vals.min(axis=0)

    return ScalarCurve(
        name="min",
        value=value,
        convex=False,
        params={"members": [c.spec() for c in curves]},
    )


_FACTORIES = {
    "parabola": parabola,
    "neg_parabola": neg_parabola,
    "k_m_parabola": k_m_parabola,
    "neg_abs": neg_abs,
    "abs": abs_curve,
    "zero": zero_curve,
    "xsin_inv": xsin_inv,
    "clipped_xsin": clipped_xsin,
    "log_exponent_dip": log_exponent_dip,
}


def curve_from_spec(spec: dict) -> ScalarCurve:
    """Build a registered curve from its JSON form, e.g. {"function": "k_m_parabola", "k": 3, "m": 4}."""
    if "function" not in spec:
        raise InputError("curve spec lacks 'function' tag")
    name = spec["function"]
    if name not in _FACTORIES:
        raise InputError(f"unknown function id {name!r}")
    params = {k: v for k, v in spec.items() if k != "function"}
    return _FACTORIES[name](**params)


def registered_curves() -> list[str]:
    return sorted(_FACTORIES)
