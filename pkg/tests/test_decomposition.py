import copy

import pytest

from conftest import manifest_names
from pcfkit import catalog
from pcfkit.curves import is_obstruction, transition_matrix
from pcfkit.decomposition import (
    ConfigurationTree,
    InadmissiblePairing,
    IncompatibleBoundaryDynamics,
    NotStandardForm,
    combine_manifest,
    decompose,
    standard_form_check,
)
from pcfkit.recursion import BranchedCoverRecursion, portrait, validate
from pcfkit.words import MarkedSphere

NAMES = manifest_names()


@pytest.fixture(scope="module")
def combined():
    return {name: combine_manifest(catalog.load(name)) for name in NAMES}


@pytest.mark.parametrize("name", NAMES)
def test_combine_output_is_valid_and_standard(name, combined):
    res = combined[name]
    assert validate(res.recursion).ok
    assert standard_form_check(res.recursion, res.multicurve, res.tree).ok


@pytest.mark.parametrize("name", NAMES)
def test_components_cover_every_sheet(name, combined):
    res = combined[name]
    dec = decompose(res.recursion, res.multicurve, res.tree)
    for node, comps in dec.components.items():
        assert sum(c.degree for c in comps) == res.recursion.degree
    # each piece lands on the sphere named by the manifest pairing
    assert set(dec.pieces) == set(res.tree.nodes())


@pytest.mark.parametrize("name", NAMES)
def test_recombining_a_decomposition(name, combined):
    res = combined[name]
    dec = decompose(res.recursion, res.multicurve, res.tree)
    again = combine_manifest(dec.to_manifest())
    assert again.recursion.degree == res.recursion.degree
    assert portrait(again.recursion).invariant() == portrait(res.recursion).invariant()
    assert again.multicurve.keys() == res.multicurve.keys()
    a = transition_matrix(again.recursion, again.multicurve)
    b = transition_matrix(res.recursion, res.multicurve)
    assert a.entries == b.entries


def test_fixture_verdicts(combined):
    kinds = {name: is_obstruction(r.recursion, r.multicurve).kind for name, r in combined.items()}
    assert kinds.pop("cubic-tuning") == "NotObstruction"
    assert set(kinds.values()) == {"Obstruction"}


def test_decompose_from_curves_alone(combined):
    res = combined["twin-levy"]
    dec = decompose(res.recursion, res.multicurve)
    assert len(dec.tree.edges) == 2
    assert {c.first_return.degree for c in dec.cycles} == {1, 2}


def test_tree_roundtrip(combined):
    tree = combined["nested-levy"].tree
    again = ConfigurationTree.from_dict(tree.to_dict(), tree.sphere)
    assert again.to_dict() == tree.to_dict()
    assert again.multicurve().keys() == tree.multicurve().keys()


def test_crossing_blocks_rejected():
    S = MarkedSphere(("-1", "a", "b", "0", "inf"))
    with pytest.raises(NotStandardForm):
        ConfigurationTree.from_blocks(S, {"g": (2, 3), "h": (3, 4)})


def test_pairing_on_one_sphere_rejected():
    m = copy.deepcopy(catalog.load("levy-pair"))
    m["pairing"] = [["cap:g:in", "cap:g:in"]]
    with pytest.raises(InadmissiblePairing):
        combine_manifest(m)


def test_disconnected_pairing_rejected():
    m = copy.deepcopy(catalog.load("levy-pair"))
    m["pairing"] = []
    with pytest.raises(InadmissiblePairing):
        combine_manifest(m)


def test_cap_degree_mismatch_rejected():
    # the cubic outer piece has local degree 3 at its cap, the inner one only 1
    m = copy.deepcopy(catalog.load("cubic-tuning"))
    m["pieces"]["g"] = catalog.load("quartic-swap")["pieces"]["g"]
    with pytest.raises((IncompatibleBoundaryDynamics, InadmissiblePairing)):
        combine_manifest(m)


def test_pieces_are_self_consistent():
    for name in NAMES:
        for d in catalog.load(name)["pieces"].values():
            assert validate(BranchedCoverRecursion.from_dict(d)).ok
