"""Regenerate the bundled fixture corpus under src/pcfkit/fixtures."""

import json
from pathlib import Path

from pcfkit import catalog
from pcfkit.decomposition import combine_manifest
from pcfkit.recursion import identity_recursion
from pcfkit.words import MarkedSphere

OUT = Path(__file__).resolve().parents[1] / "src" / "pcfkit" / "fixtures"


def write(name: str, obj) -> None:
    (OUT / f"{name}.json").write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    print("wrote", name)


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for name, r in catalog.recursions().items():
        write(name, r.to_dict())
    write("identity4", identity_recursion(MarkedSphere(("p", "q", "r", "s"))).to_dict())
    for name, m in catalog.combine_manifests().items():
        write(name, m)
        res = combine_manifest(m)
        write(f"{name}.curves", {"curves": [str(c) for c in res.multicurve.classes], "certificate": "AssertedByUser"})
        write(f"{name}.tree", res.tree.to_dict())
    write("spider_1_6", {"kind": "spider", "angle": "1/6", "seed": 0, "steps": 200})
    write(
        "mating_basilica",
        {"kind": "mating", "angles": ["1/3", "1/3"], "steps": 100, "track": "all",
         "note": "basilica mated with itself; both factors lie in the self-conjugate half limb"},
    )
    halving = [2.0 ** -k for k in range(30)]
    write(
        "degenerate_replay",
        {"kind": "replay", "proxies": {"{a,b}": halving, "{c,d}": [3.0] * 30}, "distances": [0.1] * 29},
    )


if __name__ == "__main__":
    main()
