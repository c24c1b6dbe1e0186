import itertools
import math
import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st
import pytest

from conftest import brute_force_chi, brute_force_weights, random_word, randomized
from pcfkit import catalog
from pcfkit.recursion import (
    BranchedCoverRecursion,
    FixtureFormatError,
    NonSelfMap,
    NotAPermutation,
    compose,
    identity_recursion,
    orbifold_signature,
    portrait,
    reorder_punctures,
    validate,
)
from pcfkit.words import MarkedSphere, unoriented_key


@pytest.fixture(scope="module")
def basilica():
    return catalog.load_recursion("basilica")


@pytest.fixture(scope="module")
def rabbit():
    return catalog.load_recursion("rabbit")


def test_bundled_recursions_validate():
    for name in ("z2_plus_i", "basilica", "rabbit", "identity4"):
        rep = validate(catalog.load_recursion(name))
        assert rep.ok, rep.to_dict()


def test_json_roundtrip(rabbit):
    assert BranchedCoverRecursion.loads(rabbit.dumps()) == rabbit
    assert BranchedCoverRecursion.from_dict(rabbit.to_dict()) == rabbit


def test_not_a_permutation(basilica):
    d = basilica.to_dict()
    d["generators"][0]["perm"] = [1, 1]
    with pytest.raises(NotAPermutation):
        BranchedCoverRecursion.from_dict(d)


def test_length_mismatch_is_a_format_error(basilica):
    d = basilica.to_dict()
    d["generators"][0]["lifts"] = ["x1"]
    with pytest.raises(FixtureFormatError):
        BranchedCoverRecursion.from_dict(d)


def test_wrong_product_fails_validation(basilica):
    d = basilica.to_dict()
    d["generators"][1]["lifts"] = ["x1", "x1"]
    rep = validate(BranchedCoverRecursion.from_dict(d))
    assert not rep.ok


def test_identity_recursion():
    S = MarkedSphere(("a", "b", "c", "d"))
    r = identity_recursion(S)
    assert validate(r).ok
    sig = orbifold_signature(portrait(r))
    assert set(sig.values.values()) == {1} and sig.chi == 2


def test_rabbit_signature(rabbit):
    sig = orbifold_signature(portrait(rabbit))
    assert all(v == math.inf for v in sig.values.values())
    assert sig.chi == -2 and sig.hyperbolic


def test_portrait_of_z2_plus_i():
    port = portrait(catalog.load_recursion("z2_plus_i"))
    assert port.image == {"i": "i-1", "i-1": "-i", "-i": "i-1", "inf": "inf"}
    assert port.local_degree["inf"] == 2
    assert port.unmarked_critical == (("i", 2),)


def test_compose_degree_and_portrait(basilica):
    b2 = compose(basilica, basilica)
    assert b2.degree == 4 and validate(b2).ok
    port = portrait(b2)
    assert port.image == {"0": "0", "-1": "-1", "inf": "inf"}
    # 0 -> -1 -> 0 passes one critical point per period
    assert port.local_degree == {"0": 2, "-1": 2, "inf": 4}


def test_orbifold_needs_self_map():
    G = MarkedSphere(("a", "b", "c"))
    H = MarkedSphere(("d", "e", "f"))
    with pytest.raises(NonSelfMap):
        orbifold_signature(portrait(identity_recursion(G, H)))


@pytest.mark.parametrize("name", ["rabbit", "z2_plus_i"])
def test_reorder_punctures_preserves_invariants(name):
    r = catalog.load_recursion(name)
    base = orbifold_signature(portrait(r))
    for order in itertools.permutations(r.target.punctures):
        q = reorder_punctures(r, order)
        assert q.target.punctures == order and validate(q).ok
        port = portrait(q)
        assert port.image == portrait(r).image
        assert orbifold_signature(port).values == base.values


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_randomized_presentations_keep_invariants(seed, recursion_pool):
    rng = random.Random(seed)
    name = rng.choice(sorted(recursion_pool))
    r = recursion_pool[name]
    q = randomized(r, rng)
    assert validate(q).ok
    assert portrait(q).invariant() == portrait(r).invariant()
    w = random_word(rng, r.target.n, rng.randint(1, 10))
    a = sorted((len(c), unoriented_key(x)) for c, x in r.word_cycles(w))
    b = sorted((len(c), unoriented_key(x)) for c, x in q.word_cycles(w))
    assert a == b


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_orbifold_matches_brute_force(seed, recursion_pool):
    rng = random.Random(seed)
    r = recursion_pool[rng.choice(sorted(recursion_pool))]
    if not r.is_self_map:
        return
    port = portrait(r)
    sig = orbifold_signature(port)
    weights = brute_force_weights(port)
    assert sig.values == weights
    assert sig.chi == brute_force_chi(weights)
    assert isinstance(sig.chi, Fraction)
