"""Builders for the bundled example maps and gluing manifests.

Polynomial pieces come from numerical monodromy; small degree-one pieces are
written by hand.  ``scripts/build_fixtures.py`` freezes the output as JSON.
"""

from __future__ import annotations

import cmath
import json
from importlib import resources

from .monodromy import polynomial_recursion
from .recursion import BranchedCoverRecursion, identity_recursion
from .words import MarkedSphere

GOLDEN_MINUS = (1 - 5**0.5) / 2
GOLDEN_PLUS = (1 + 5**0.5) / 2
OMEGA = cmath.exp(2j * cmath.pi / 3)


def _base(k: int, scale: float = 1.0) -> complex:
    return 3 * scale * cmath.exp(1j * (0.3137 + 0.2618 * k))


def z2_plus_i() -> BranchedCoverRecursion:
    return polynomial_recursion([1, 0, 1j], {"i": 1j, "i-1": 1j - 1, "-i": -1j}, basepoint=4.5 * cmath.exp(5.55j))


def basilica() -> BranchedCoverRecursion:
    return polynomial_recursion([1, 0, -1], {"0": 0, "-1": -1}, basepoint=_base(4))


def rabbit() -> BranchedCoverRecursion:
    # c is the root of c^3 + 2c^2 + c + 1 with positive imaginary part
    c = complex(-0.12256116687665362, 0.7448617666197442)
    return polynomial_recursion([1, 0, c], {"0": 0, "c": c, "c2+c": c * c + c})


def swap3(a: str, b: str, cap: str) -> BranchedCoverRecursion:
    """Degree one on ``(a, b, cap)`` exchanging ``a`` and ``b``."""
    S = MarkedSphere((a, b, cap))
    return BranchedCoverRecursion(1, S, S, ((0,), (0,), (0,)), (((2,),), ((-2, 1, 2),), ((3,),)))


def rotate4(a: str, b: str, c: str, cap: str) -> BranchedCoverRecursion:
    """Degree one on ``(a, b, c, cap)`` with ``a -> c -> b -> a`` read off the lifts."""
    S = MarkedSphere((a, b, c, cap))
    return BranchedCoverRecursion(1, S, S, ((0,),) * 4, (((2,),), ((3,),), ((-3, -2, 1, 2, 3),), ((4,),)))


def swap_across(a: str, mid: str, b: str, cap: str) -> BranchedCoverRecursion:
    """Degree one on ``(a, mid, b, cap)`` exchanging ``a`` and ``b`` and fixing ``mid``."""
    S = MarkedSphere((a, mid, b, cap))
    lifts = (((1, 2, 3, -2, -1),), ((1, 2, -1),), ((1,),), ((4,),))
    return BranchedCoverRecursion(1, S, S, ((0,),) * 4, lifts)


def _manifest(name: str, pieces: dict, pairing: list, note: str) -> dict:
    return {
        "name": name,
        "note": note,
        "pieces": {k: v.to_dict() for k, v in pieces.items()},
        "pairing": [list(p) for p in pairing],
    }


def combine_manifests() -> dict[str, dict]:
    out = {}
    root = polynomial_recursion([1, 0, -1], {"0": 0, "-1": -1, "cap:g:out": GOLDEN_MINUS}, basepoint=_base(4))
    out["levy-pair"] = _manifest(
        "levy-pair",
        {"root": root, "g": swap3("a", "b", "cap:g:in")},
        [("cap:g:in", "cap:g:out")],
        "basilica with a disk holding two swapped points glued at its alpha fixed point",
    )
    out["basilica-rotation"] = _manifest(
        "basilica-rotation",
        {"root": root, "g": rotate4("a", "b", "c", "cap:g:in")},
        [("cap:g:in", "cap:g:out")],
        "basilica with a rotating three-point disk at its alpha fixed point",
    )
    cube = polynomial_recursion([1, 0, 0, 0], {"0": 0, "cap:g:out": 1}, basepoint=_base(4))
    out["cubic-rotation"] = _manifest(
        "cubic-rotation",
        {"root": cube, "g": rotate4("a", "b", "c", "cap:g:in")},
        [("cap:g:in", "cap:g:out")],
        "z^3 with a rotating three-point disk at the fixed point 1",
    )
    quart = polynomial_recursion([1, 0, 0, 0, 0], {"0": 0, "cap:g:out": 1}, basepoint=_base(4))
    out["quartic-swap"] = _manifest(
        "quartic-swap",
        {"root": quart, "g": swap3("a", "b", "cap:g:in")},
        [("cap:g:in", "cap:g:out")],
        "z^4 with a two-point swapping disk at the fixed point 1",
    )
    out["nested-levy"] = _manifest(
        "nested-levy",
        {
            "root": root,
            "g": swap_across("a", "cap:h:out", "b", "cap:g:in"),
            "h": swap3("c", "d", "cap:h:in"),
        },
        [("cap:g:in", "cap:g:out"), ("cap:h:in", "cap:h:out")],
        "two nested invariant disks below the basilica alpha fixed point",
    )
    twin = polynomial_recursion(
        [1, 0, -1], {"0": 0, "-1": -1, "cap:g:out": GOLDEN_MINUS, "cap:h:out": GOLDEN_PLUS}, basepoint=_base(4)
    )
    out["twin-levy"] = _manifest(
        "twin-levy",
        {"root": twin, "g": swap3("a", "b", "cap:g:in"), "h": swap3("c", "d", "cap:h:in")},
        [("cap:g:in", "cap:g:out"), ("cap:h:in", "cap:h:out")],
        "basilica with swapping disks at both fixed points",
    )
    sq = polynomial_recursion([1, 0, 0], {"0": 0, "cap:g:out": OMEGA, "cap:h:out": OMEGA**2})
    G = MarkedSphere(("a", "b", "cap:g:in"))
    H = MarkedSphere(("c", "d", "cap:h:in"))
    out["levy-period-two"] = _manifest(
        "levy-period-two",
        {"root": sq, "g": identity_recursion(G, H), "h": identity_recursion(H, G)},
        [("cap:g:in", "cap:g:out"), ("cap:h:in", "cap:h:out")],
        "z^2 with two disks exchanged along the period-two cycle of cube roots of unity",
    )
    inner = polynomial_recursion([1, 0, 0, 0], {"a": 0, "b": 1}, basepoint=_base(4), infinity="cap:g:in")
    outer = polynomial_recursion([1, 0, 0, 0], {"cap:g:out": 0, "1": 1}, basepoint=_base(4))
    out["cubic-tuning"] = _manifest(
        "cubic-tuning",
        {"root": outer, "g": inner},
        [("cap:g:in", "cap:g:out")],
        "z^3 tuned by z^3 at its critical fixed point; the curve pulls back with degree three",
    )
    return out


def recursions() -> dict[str, BranchedCoverRecursion]:
    return {"z2_plus_i": z2_plus_i(), "basilica": basilica(), "rabbit": rabbit()}


def load(name: str) -> dict:
    """Bundled fixture ``name`` (without ``.json``) as a dict."""
    text = resources.files("pcfkit").joinpath("fixtures", f"{name}.json").read_text()
    return json.loads(text)


def load_recursion(name: str) -> BranchedCoverRecursion:
    return BranchedCoverRecursion.from_dict(load(name))


def fixture_names() -> list[str]:
    root = resources.files("pcfkit").joinpath("fixtures")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
