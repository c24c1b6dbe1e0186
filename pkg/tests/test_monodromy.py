import pytest

from pcfkit import catalog
from pcfkit.monodromy import polynomial_recursion
from pcfkit.recursion import orbifold_signature, portrait, validate


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_power_maps(d):
    r = polynomial_recursion([1] + [0] * d, {"0": 0, "1": 1})
    assert r.degree == d and validate(r).ok
    port = portrait(r)
    assert port.local_degree == {"0": d, "1": 1, "inf": d}
    assert port.image == {"0": "0", "1": "1", "inf": "inf"}


def test_rebuilt_fixtures_match_frozen_json():
    for name, r in catalog.recursions().items():
        frozen = catalog.load_recursion(name)
        assert portrait(r).invariant() == portrait(frozen).invariant()
        assert orbifold_signature(portrait(r)) == orbifold_signature(portrait(frozen))


def test_preimage_of_marked_critical_value():
    # z^2 - 2: critical value -2 maps to 2, which is fixed; 0 is not marked
    r = polynomial_recursion([1, 0, -2], {"-2": -2, "2": 2})
    port = portrait(r)
    assert port.image == {"-2": "2", "2": "2", "inf": "inf"}
    assert ("-2", 2) in port.unmarked_critical
    sig = orbifold_signature(port)
    assert sig.values == {"-2": 2, "2": 2, "inf": float("inf")} and sig.chi == 0
