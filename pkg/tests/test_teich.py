import cmath
import math
from fractions import Fraction

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from pcfkit import catalog, teich


# -- collars -------------------------------------------------------------------


def test_collar_half_width_at_special_length():
    x0 = 2 * math.asinh(1.0)
    assert teich.collar_width(x0) == pytest.approx(x0 / 2, abs=1e-15)
    assert teich.full_collar_width(x0) == pytest.approx(x0, abs=1e-12)


def test_collar_fixed_point():
    p = teich.COLLAR_FIXED_POINT
    assert abs(teich.collar_width(p) - p) < 1e-12
    s = teich.collar_width
    assert abs(s(s(p)) - p) < 1e-12


@given(st.floats(min_value=1e-3, max_value=30.0))
def test_full_width_is_an_involution(x):
    w = teich.full_collar_width
    assert w(w(x)) == pytest.approx(x, rel=1e-9)


def test_collar_blows_up_near_zero():
    assert teich.collar_width(1e-6) > 14
    assert teich.collar_width(1e-6) == pytest.approx(math.log(4 / 1e-6), rel=1e-6)


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
def test_collar_domain(x):
    with pytest.raises(teich.DomainError):
        teich.collar_width(x)


def test_cusp_collar():
    assert teich.cusp_collar_area(1.0) == 2.0
    assert teich.cusp_collar_boundary_length(0.5) == 4.0
    with pytest.raises(teich.DomainError):
        teich.cusp_collar_area(0.0)


# -- length proxy --------------------------------------------------------------

points4 = st.lists(
    st.complex_numbers(min_magnitude=0.1, max_magnitude=5.0, allow_nan=False, allow_infinity=False),
    min_size=4,
    max_size=4,
)


def _spread(pts) -> bool:
    return all(abs(a - b) > 1e-2 for i, a in enumerate(pts) for b in pts[i + 1 :])


@settings(max_examples=40, deadline=None)
@given(points4, st.floats(0.2, 5.0), st.floats(0.0, 2 * math.pi), st.complex_numbers(max_magnitude=3.0))
def test_proxy_similarity_invariance(pts, scale, angle, shift):
    if not _spread(pts):
        return
    labels = ["p", "q", "r", "s"]
    a = dict(zip(labels, pts))
    m = scale * cmath.exp(1j * angle)
    b = {k: m * z + shift for k, z in a.items()}
    assert teich.length_proxy(b, ("p", "q")) == pytest.approx(teich.length_proxy(a, ("p", "q")), rel=1e-5)


def test_proxy_shrinks_as_cluster_tightens():
    vals = []
    for eps in (0.5, 0.1, 0.01):
        pts = {"a": 0j, "b": eps + 0j, "c": 1 + 0j, "d": teich.INF}
        vals.append(teich.length_proxy(pts, ("a", "b")))
    assert vals[0] > vals[1] > vals[2] > 0


def test_proxy_collision():
    with pytest.raises(teich.DegenerateConfiguration):
        teich.length_proxy({"a": 0j, "b": 0j, "c": 1 + 0j, "d": teich.INF}, ("a", "b"))


def test_bipartitions_count():
    sides = teich.bipartitions(["a", "b", "c", "d", "e"])
    # each class is listed once, by the side without the last label
    assert all(2 <= len(s) <= 3 and "e" not in s for s in sides)
    assert len(sides) == len({frozenset(s) for s in sides})


# -- spider --------------------------------------------------------------------


def test_angle_orbit_preperiodic():
    orbit, succ = teich.angle_orbit(Fraction(1, 6))
    assert orbit == [Fraction(1, 6), Fraction(1, 3), Fraction(2, 3)]
    assert succ == [1, 2, 1]


def test_spider_step_fixes_exact_configuration():
    cfg = teich.spider_start(Fraction(1, 6))
    c = 1j
    exact = (c, c * c + c, (c * c + c) ** 2 + c, 0j, teich.INF)
    cfg = teich.SpiderConfiguration(cfg.labels, exact, cfg.images, 0, exact, "spider", None, cfg.angle)
    nxt = teich.spider_step(cfg)
    assert nxt.distance(cfg) < 1e-12


def test_spider_is_deterministic():
    a = teich.spider_start(Fraction(1, 6), np.random.default_rng(3))
    b = teich.spider_start(Fraction(1, 6), np.random.default_rng(3))
    for _ in range(5):
        a, b = teich.spider_step(a), teich.spider_step(b)
    assert a.points == b.points


@pytest.mark.parametrize(
    "theta, c",
    [(Fraction(1, 7), complex(-0.12256116687665362, 0.7448617666197442)), (Fraction(1, 3), -1 + 0j)],
)
def test_spider_periodic_angles(theta, c):
    st_, cls = teich.run_spider(theta, steps=300)
    assert cls.kind == "Converged"
    assert abs(cls.estimate - c) < 1e-6
    assert teich.critical_orbit_defect(theta, cls.estimate) < 1e-8


def test_spider_with_tracking_stays_bounded():
    st_, cls = teich.run_spider(Fraction(1, 6), steps=200, tracked=[("t0", "t1")])
    assert cls.kind == "Converged"
    assert min(st_.proxies["{t0,t1}"]) > 0


# -- classification ------------------------------------------------------------


def test_replay_fixture_is_degenerate():
    d = catalog.load("degenerate_replay")
    cls = teich.classify_sequences(d["proxies"], d["distances"])
    assert cls.kind == "Degenerate" and cls.shrinking == ("{a,b}",)
    assert cls.floor == 3.0


def test_short_runs_are_indeterminate():
    cls = teich.classify_sequences({"{a,b}": [1.0, 0.9]}, [0.1])
    assert cls.kind == "Indeterminate"


def test_settled_but_pinching_is_not_converged():
    cls = teich.classify_sequences({}, [1e-12], separated=False)
    assert cls.kind != "Converged"


def test_obstructed_mating_degenerates():
    labels = teich.mating_start(Fraction(1, 3), Fraction(1, 3)).labels
    st_, cls = teich.run_mating(Fraction(1, 3), Fraction(1, 3), steps=100, tracked=teich.bipartitions(labels))
    assert cls.kind == "Degenerate" and cls.shrinking
    assert st_.collision is not None


def test_mating_with_trivial_factor_matches_spider():
    # with z^2 as second factor the limit is the spider limit rescaled so c = 1
    _, spider = teich.run_spider(Fraction(1, 6), steps=200)
    st_, cls = teich.run_mating(Fraction(1, 6), Fraction(0), steps=300, tracked=[])
    assert cls.kind == "Converged"
    c = spider.estimate
    want = {"a0": 1, "a1": (c * c + c) / c, "a2": ((c * c + c) ** 2 + c) / c, "ac": 0}
    got = st_.current.as_dict()
    for k, v in want.items():
        assert abs(got[k] - v) < 1e-8
