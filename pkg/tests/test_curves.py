from fractions import Fraction

import pytest

from pcfkit import catalog
from pcfkit.curves import (
    ASSERTED,
    Multicurve,
    NotStable,
    SphereMismatch,
    decide_obstruction,
    default_seeds,
    is_obstruction,
    is_stable,
    normalize,
    pullback_class,
    saturate,
    search_obstruction,
    transition_matrix,
)
from pcfkit.decomposition import combine_manifest
from pcfkit.words import MarkedSphere


@pytest.fixture(scope="module")
def levy():
    return combine_manifest(catalog.load("levy-pair"))


@pytest.fixture(scope="module")
def z2i():
    return catalog.load_recursion("z2_plus_i")


def test_normalize_is_conjugation_invariant(z2i):
    a = normalize("x1x2", z2i.target)
    b = normalize("x2x1", z2i.target)
    c = normalize("X2X1", z2i.target)
    assert a.key == b.key == c.key


def test_peripheral_classes_rejected_from_multicurves(z2i):
    with pytest.raises(ValueError):
        Multicurve((normalize("x1", z2i.target),), ASSERTED)


def test_pullback_degrees_sum_to_degree(z2i):
    for w in ("x1x2", "x2x3", "x1x3", "x1X2x3"):
        res = pullback_class(z2i, normalize(w, z2i.target))
        assert sum(c.degree for c in res.components) == z2i.degree


def test_levy_curve_is_invariant(levy):
    gamma = levy.multicurve
    ok, bad = is_stable(levy.recursion, gamma)
    assert ok and bad is None
    tm = transition_matrix(levy.recursion, gamma)
    assert tm.entries == ((1,),) and tm.enclosure == (1, 1)


def test_levy_obstruction(levy):
    v = is_obstruction(levy.recursion, levy.multicurve)
    assert v.kind == "Obstruction" and v.enclosure == (1, 1)


def test_unstable_multicurve_raises(z2i):
    gamma = Multicurve((normalize("x1x2", z2i.target),), ASSERTED)
    if not is_stable(z2i, gamma)[0]:
        with pytest.raises(NotStable):
            transition_matrix(z2i, gamma)


def test_sphere_mismatch(z2i):
    other = MarkedSphere(("p", "q", "r", "s"))
    with pytest.raises(SphereMismatch):
        pullback_class(z2i, normalize("x1x2", other))


def test_decide_obstruction_thresholds():
    assert decide_obstruction([[Fraction(1, 2)]])[0] == "NotObstruction"
    assert decide_obstruction([[1]])[0] == "Obstruction"
    assert decide_obstruction([[0, 2], [1, 0]])[0] == "Obstruction"


def test_saturation_reaches_levy_curve(levy):
    sat = saturate(levy.recursion, levy.multicurve, 10, 64)
    assert sat.kind != "Exceeded"
    assert set(levy.multicurve.keys()) <= set(sat.multicurve.keys())


def test_search_finds_levy_obstruction(levy):
    res = search_obstruction(levy.recursion)
    assert res.kind == "Found" and res.verdict.kind == "Obstruction"


def test_search_on_z2_plus_i(z2i):
    assert search_obstruction(z2i, None, 10).kind == "NoneFoundWithinBudget"
    assert search_obstruction(z2i, None, 10, max_classes=0).kind == "Exceeded"


def test_search_skips_degree_one():
    r = catalog.load_recursion("identity4")
    res = search_obstruction(r)
    assert res.kind == "NoneFoundWithinBudget" and res.report == [{"skipped": "degree one"}]


def test_default_seeds_are_essential():
    S = MarkedSphere(("a", "b", "c", "d", "e"))
    seeds = default_seeds(S)
    assert seeds and all(len(m) >= 1 for m in seeds)
