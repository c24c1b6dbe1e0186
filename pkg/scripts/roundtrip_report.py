"""Combine every bundled manifest, decompose it again, and tabulate the invariants.

    python scripts/roundtrip_report.py
"""

import time

from pcfkit import catalog
from pcfkit.curves import is_obstruction, search_obstruction
from pcfkit.decomposition import combine_manifest, decompose
from pcfkit.recursion import BranchedCoverRecursion, portrait


def manifests() -> list[str]:
    names = catalog.fixture_names()
    return [n for n in names if f"{n}.tree" in names]


def report(name: str) -> str:
    t0 = time.perf_counter()
    m = catalog.load(name)
    res = combine_manifest(m)
    r = res.recursion
    verdict = is_obstruction(r, res.multicurve)
    dec = decompose(r, res.multicurve, res.tree)
    same = all(
        portrait(BranchedCoverRecursion.from_dict(d)).invariant() == portrait(dec.pieces[k]).invariant()
        for k, d in m["pieces"].items()
    )
    cycles = []
    for c in dec.cycles:
        f = c.first_return
        tag = f"{'/'.join(c.nodes)}:d{f.degree}:chi={c.signature.chi}"
        if f.degree >= 2 and c.signature.hyperbolic:
            tag += ":" + search_obstruction(f, None, 10, 64).kind
        cycles.append(tag)
    lo, hi = verdict.enclosure
    dt = time.perf_counter() - t0
    return (
        f"{name:<18} d={r.degree} n={r.target.n}  {verdict.kind:<15} lambda in [{lo},{hi}]  "
        f"pieces preserved={same}  {' '.join(cycles)}  ({dt:.2f}s)"
    )


def main() -> None:
    for name in manifests():
        print(report(name))


if __name__ == "__main__":
    main()
