"""Set oracle catalog: membership, projection, distance, translation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epl import defaults
from epl.errors import DimensionMismatchError, InputError
from epl.functions import k_m_parabola, neg_parabola, parabola, xsin_inv
from epl.geometry import (
    Ball,
    Box,
    Epigraph1d,
    Halfspace,
    Hypograph1d,
    Polyhedron,
    ProductSet,
    Translated,
    halfplane_product,
    intersection,
    negnorm_epigraph,
    oracle_from_spec,
    sample_set_points,
    whole_space,
)
from epl.sampling import rng_for

LOWER = Halfspace([0.0, 1.0], 0.0)  # {x2 <= 0}
PARABOLA_HYPO = Hypograph1d(parabola())  # {x2 <= x1^2}
UNIT_BALL = Ball([0.0, 0.0], 1.0)


def test_contains_halfspace_interior():
    assert LOWER.contains([0.3, -0.1], 1e-9)


def test_contains_above_parabola_false():
    assert not PARABOLA_HYPO.contains([0.0, 0.1], 1e-9)


def test_contains_ball_boundary():
    assert UNIT_BALL.contains([1.0, 0.0], 1e-9)


def test_project_halfspace_orthogonal_drop():
    w = LOWER.project([0.3, 0.5])
    np.testing.assert_allclose(w, [0.3, 0.0], atol=1e-12)


def test_project_parabola_tie_break_lexmax():
    # nearest points to (0, 1) are (+-1/sqrt2, 1/2); lex-max picks the + branch
    w = PARABOLA_HYPO.project([0.0, 1.0])
    np.testing.assert_allclose(w, [1.0 / math.sqrt(2.0), 0.5], atol=1e-9)


def test_project_ball_radial():
    np.testing.assert_allclose(UNIT_BALL.project([2.0, 0.0]), [1.0, 0.0], atol=1e-12)


def test_distance_parabola():
    assert PARABOLA_HYPO.distance([0.0, 1.0]) == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-9)


def test_distance_inside_zero():
    assert PARABOLA_HYPO.distance([0.0, -5.0]) == 0.0


def test_distance_halfplane_vertical_drop():
    assert halfplane_product("lower").distance([5.0, 2.0]) == pytest.approx(2.0, abs=1e-12)


def test_translate_halfplane():
    t = 0.25
    shifted = halfplane_product("lower").translate([0.0, t])
    assert shifted.contains([0.0, -t], 1e-12)
    assert not shifted.contains([0.0, 0.0], 1e-9)


def test_translate_zero_is_identity_on_probes():
    rng = rng_for(7, "translate-identity")
    shifted = PARABOLA_HYPO.translate([0.0, 0.0])
    for _ in range(100):
        x = rng.uniform(-2, 2, size=2)
        np.testing.assert_array_equal(shifted.project(x), PARABOLA_HYPO.project(x))


def test_translate_ball_projection():
    # ball{0,1} shifted by (1,0) becomes ball{(-1,0),1}; nearest point to (3,0) is (0,0)
    shifted = UNIT_BALL.translate([1.0, 0.0])
    np.testing.assert_allclose(shifted.project([3.0, 0.0]), [0.0, 0.0], atol=1e-12)


def test_negnorm_epigraph_projection_tie():
    # (0,-1) is equidistant from both branches; lex-max resolves to the right one
    epi = negnorm_epigraph()
    w = epi.project([0.0, -1.0])
    np.testing.assert_allclose(w, [0.5, -0.5], atol=1e-12)
    assert epi.distance([0.0, -1.0]) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)


def test_km_parabola_projection_branches():
    epi = Epigraph1d(k_m_parabola(3, 4))
    # point above the flat branch projects straight down for negative abscissa
    np.testing.assert_allclose(epi.project([-1.0, -2.0]), [-1.0, 0.0], atol=1e-12)
    # graph membership
    w = epi.project([0.5, -3.0])
    assert epi.contains(w, 1e-9)


def test_polyhedron_projection_corner():
    quad = Polyhedron([Halfspace([1.0, 0.0], 0.0), Halfspace([0.0, 1.0], 0.0)])
    np.testing.assert_allclose(quad.project([1.0, 1.0]), [0.0, 0.0], atol=1e-10)
    np.testing.assert_allclose(quad.project([-1.0, 2.0]), [-1.0, 0.0], atol=1e-10)


def test_intersection_of_epigraphs_rewrites_to_graph():
    members = [Epigraph1d(k_m_parabola(k, 4)) for k in (1, 2, 3)]
    inter = intersection(members)
    assert isinstance(inter, Epigraph1d)
    # max of k^4 x^2 over k<=3 equals 81 x^2 on x>=0
    assert inter.curve.value(np.array([2.0]))[0] == pytest.approx(81 * 4.0)


def test_product_projection():
    prod = ProductSet([LOWER, UNIT_BALL])
    w = prod.project([0.3, 0.5, 2.0, 0.0])
    np.testing.assert_allclose(w, [0.3, 0.0, 1.0, 0.0], atol=1e-12)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatchError):
        LOWER.contains([1.0, 2.0, 3.0])


def test_nonfinite_point_rejected():
    with pytest.raises(InputError):
        LOWER.project([np.nan, 0.0])


# -- catalog serialisation ---------------------------------------------------

ROUND_TRIP_SPECS = [
    {"family": "halfspace", "normal": [0.0, 1.0], "offset": 0.0},
    {"family": "ball", "center": [0.0, 0.0], "radius": 1.0},
    {"family": "box", "lo": [None, None], "hi": [None, 0.0]},
    {"family": "epigraph1d", "function": "k_m_parabola", "k": 3, "m": 4},
    {"family": "hypograph1d", "function": "parabola"},
    {"family": "negnorm_epigraph"},
    {"family": "halfplane_product", "sign": "upper"},
    {
        "family": "translated",
        "shift": [0.0, 0.01],
        "inner": {"family": "halfspace", "normal": [0.0, 1.0], "offset": 0.0},
    },
    {
        "family": "intersection",
        "members": [
            {"family": "halfspace", "normal": [1.0, 0.0], "offset": 0.0},
            {"family": "halfspace", "normal": [0.0, 1.0], "offset": 0.0},
        ],
    },
]


@pytest.mark.parametrize("spec", ROUND_TRIP_SPECS, ids=lambda s: s["family"])
def test_oracle_from_spec_builds_and_projects(spec):
    oracle = oracle_from_spec(spec)
    x = np.full(oracle.dim, 0.37)
    w = oracle.project(x)
    assert oracle.contains(w, defaults.TOL_FEAS * 10)


def test_unknown_family_rejected():
    with pytest.raises(InputError):
        oracle_from_spec({"family": "simplex"})


# -- projection properties ----------------------------------------------------

FAMILIES = {
    "halfspace": LOWER,
    "ball": UNIT_BALL,
    "box": halfplane_product("lower"),
    "polyhedron": Polyhedron([Halfspace([1.0, 0.0], 0.0), Halfspace([0.0, 1.0], 0.0)]),
    "parabola_hypo": PARABOLA_HYPO,
    "km_epi": Epigraph1d(k_m_parabola(2, 4)),
    "neg_parabola_epi": Epigraph1d(neg_parabola()),
    "negnorm": negnorm_epigraph(),
    "xsin_epi": Epigraph1d(xsin_inv()),
}


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_projection_idempotent(name):
    oracle = FAMILIES[name]
    rng = rng_for(11, "idem", name)
    X = rng.uniform(-2.0, 2.0, size=(200, oracle.dim))
    for x in X:
        w = oracle.project(x)
        w2 = oracle.project(w)
        assert np.linalg.norm(w2 - w) <= defaults.TOL_FEAS


@pytest.mark.parametrize(
    "name", [n for n in sorted(FAMILIES) if FAMILIES[n].convex]
)
def test_projection_nonexpansive_on_convex(name):
    oracle = FAMILIES[name]
    rng = rng_for(13, "nonexp", name)
    for _ in range(200):
        x, y = rng.uniform(-2.0, 2.0, size=(2, oracle.dim))
        px, py = oracle.project(x), oracle.project(y)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + defaults.TOL_FEAS


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_translation_equivariance_exact(name):
    oracle = FAMILIES[name]
    rng = rng_for(17, "equiv", name)
    shift = rng.uniform(-1.0, 1.0, size=oracle.dim)
    shifted = oracle.translate(shift)
    for _ in range(100):
        x = rng.uniform(-2.0, 2.0, size=oracle.dim)
        assert shifted.distance(x) == oracle.distance(x + shift)


@settings(max_examples=60, deadline=None)
@given(
    p=st.floats(-3.0, 3.0),
    q=st.floats(-3.0, 3.0),
)
def test_parabola_projection_matches_brute_force(p, q):
    """Closed-form cubic candidates agree with a dense grid minimisation."""
    x = np.array([p, q])
    w = PARABOLA_HYPO.project(x)
    grid = np.linspace(-8.0, 8.0, 40_001)
    d2 = (grid - p) ** 2 + (grid**2 - q) ** 2
    best = math.sqrt(float(d2.min()))
    assert np.linalg.norm(w - x) <= best + 1e-4


def test_sample_set_points_inside():
    pts = sample_set_points(PARABOLA_HYPO, np.zeros(2), 0.5, 64, seed=3)
    assert len(pts) > 10
    for p in pts:
        assert PARABOLA_HYPO.contains(p, 1e-7)
        assert np.linalg.norm(p) <= 0.5 + 1e-6


def test_whole_space_contains_everything():
    ws = whole_space(2)
    assert ws.contains([1e9, -1e9])
    assert ws.distance([5.0, 5.0]) == 0.0
