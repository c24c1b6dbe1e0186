"""Command-line entry point.

Every command prints one JSON object with ``"schema": "tk/1"`` and sorted keys.
Exit status: 0 on success, 1 when the input is well formed but fails a
mathematical check, 2 when a file cannot be read or parsed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
from fractions import Fraction

import numpy as np

from . import teich
from .curves import (
    ASSERTED,
    Multicurve,
    NotStable,
    SphereMismatch,
    normalize,
    pullback_class,
    search_obstruction,
    transition_matrix,
)
from .decomposition import (
    ConfigurationTree,
    InadmissiblePairing,
    IncompatibleBoundaryDynamics,
    NotStandardForm,
    combine_manifest,
    decompose,
)
from .recursion import BranchedCoverRecursion, FixtureFormatError, InvalidRecursion, orbifold_signature, portrait, validate
from .words import WordSyntaxError

SCHEMA = "tk/1"


class InputError(Exception):
    """Unreadable or malformed input (exit 2)."""


class DomainFailure(Exception):
    """Well-formed input that fails a check (exit 1)."""


DOMAIN_ERRORS = (
    InvalidRecursion,
    NotStable,
    SphereMismatch,
    NotStandardForm,
    InadmissiblePairing,
    IncompatibleBoundaryDynamics,
    teich.DomainError,
    teich.DegenerateConfiguration,
)


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return "inf" if teich.is_inf(x) else [x.real, x.imag]
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, np.generic):
        return _clean(x.item())
    return x


def dumps(obj: dict, indent: int | None) -> str:
    return json.dumps(_clean({**obj, "schema": SCHEMA}), sort_keys=True, indent=indent)


def write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tk-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def load_map(path: str) -> BranchedCoverRecursion:
    """A recursion file, or a gluing manifest which is combined first."""
    d = read_json(path)
    if not isinstance(d, dict):
        raise InputError(f"{path} must hold a JSON object")
    if "pieces" in d:
        return combine_manifest(d).recursion
    return BranchedCoverRecursion.from_dict(d)


def load_curves(args, sphere) -> Multicurve:
    if getattr(args, "curves", None):
        d = read_json(args.curves)
        if isinstance(d, list):
            d = {"curves": d, "certificate": "AssertedByUser"}
        try:
            return Multicurve.from_dict(d, sphere)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed curve file: {exc}") from exc
    words = getattr(args, "words", None) or []
    return Multicurve(tuple(normalize(w, sphere) for w in words), ASSERTED)


# -- commands ------------------------------------------------------------------


def cmd_validate(args) -> tuple[dict, int]:
    r = load_map(args.path)
    rep = validate(r)
    out = {"valid": rep.ok, "checks": rep.to_dict()["checks"], "degree": r.degree, "punctures": list(r.target.punctures)}
    return out, 0 if rep.ok else 1


def cmd_orbifold(args) -> tuple[dict, int]:
    r = load_map(args.path)
    sig = orbifold_signature(portrait(r))
    vals = sig.as_list(r.source.punctures)
    return {
        "signature": ["inf" if v == math.inf else int(v) for v in vals],
        "chi": str(sig.chi),
        "hyperbolic": sig.hyperbolic,
    }, 0


def cmd_pullback(args) -> tuple[dict, int]:
    r = load_map(args.path)
    c = normalize(args.word, r.target)
    res = pullback_class(r, c)
    comps = [
        {"curve": str(k.curve), "degree": k.degree, "kind": str(k.classification), "sheets": [s + 1 for s in k.sheets]}
        for k in res.components
    ]
    return {"curve": str(c), "components": comps, "degree_sum": sum(k.degree for k in res.components)}, 0


def cmd_matrix(args) -> tuple[dict, int]:
    r = load_map(args.path)
    gamma = load_curves(args, r.target)
    tm = transition_matrix(r, gamma, args.tol)
    return tm.to_dict(), 0


def cmd_obstruction(args) -> tuple[dict, int]:
    r = load_map(args.path)
    seeds = None
    if args.seeds:
        d = read_json(args.seeds)
        items = d.get("seeds", []) if isinstance(d, dict) else d
        try:
            seeds = [
                Multicurve(tuple(normalize(w, r.target) for w in (s if isinstance(s, list) else [s])), ASSERTED)
                for s in items
            ]
        except WordSyntaxError as exc:
            raise InputError(str(exc)) from exc
    res = search_obstruction(r, seeds, args.max_iter, args.max_classes, args.tol)
    return res.to_dict(), 0


def cmd_decompose(args) -> tuple[dict, int]:
    r = load_map(args.path)
    gamma = load_curves(args, r.target)
    if args.tree:
        tree = ConfigurationTree.from_dict(read_json(args.tree), r.target)
    else:
        tree = ConfigurationTree.from_curves(r.target, gamma)
    res = decompose(r, gamma, tree)
    manifest = res.to_manifest()
    if args.out:
        write_atomic(args.out, dumps(manifest, 2) + "\n")
    return {"manifest": manifest, "summary": res.summary(), "tree": tree.to_dict()}, 0


def cmd_combine(args) -> tuple[dict, int]:
    d = read_json(args.manifest)
    if not isinstance(d, dict):
        raise InputError("manifest must hold a JSON object")
    res = combine_manifest(d)
    if args.out:
        write_atomic(args.out, res.recursion.dumps(2))
    return {
        "recursion": res.recursion.to_dict(),
        "multicurve": res.multicurve.to_dict(),
        "tree": res.tree.to_dict(),
    }, 0


def _parse_track(text: str | None, labels) -> list | None:
    if text is None:
        return None
    if text == "all":
        return teich.bipartitions(labels)
    if text == "none":
        return []
    out = []
    for part in text.split(";"):
        side = tuple(p.strip() for p in part.split(",") if p.strip())
        if not set(side) <= set(labels):
            raise InputError(f"unknown labels in tracked side {side}")
        out.append(side)
    return out


def _write_csv(path: str, st: teich.PullbackIterationState) -> None:
    labels = st.history[0].labels
    names = list(st.proxies)
    rows = []
    for i, cfg in enumerate(st.history):
        row = [i]
        for z in cfg.points:
            row += ["inf", "inf"] if teich.is_inf(z) else [repr(z.real), repr(z.imag)]
        for n in names:
            seq = st.proxies[n]
            row.append(repr(seq[i]) if i < len(seq) else "")
        rows.append(row)
    header = ["iteration"] + [f"{p}.{part}" for p in labels for part in ("re", "im")] + names
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tk-")
    with os.fdopen(fd, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


def run_iteration(spec: dict, csv_path: str | None = None) -> dict:
    """Run a spider, mating or replay description and return its verdict record."""
    kind = spec.get("kind", "spider")
    th = spec.get("thresholds", {})
    window = int(th.get("window", 20))
    threshold = float(th.get("threshold", 1e-3))
    tol = float(th.get("tol", 1e-10))
    if kind == "replay":
        cls = teich.classify_sequences(spec["proxies"], spec.get("distances", []), window, threshold, tol)
        return {"kind": kind, **cls.to_dict()}
    steps = int(spec.get("steps", 200 if kind == "spider" else 100))
    if kind == "spider":
        theta = Fraction(spec["angle"])
        rng = np.random.default_rng(spec["seed"]) if spec.get("seed") is not None else None
        cfg = teich.spider_start(theta, rng)
        track = _parse_track(spec.get("track", "none"), cfg.labels)
    elif kind == "mating":
        if not spec.get("enable_mating", False):
            raise DomainFailure("mating runs are behind a feature flag; pass --mating")
        t1, t2 = (Fraction(a) for a in spec["angles"])
        cfg = teich.mating_start(t1, t2)
        track = _parse_track(spec.get("track", "all"), cfg.labels)
    else:
        raise InputError(f"unknown run kind {kind!r}")
    st = teich.iterate(teich.PullbackIterationState.start(cfg, track), steps, tol)
    cls = teich.classify_iteration(st, window, threshold, tol)
    if csv_path:
        _write_csv(csv_path, st)
    out = {"kind": kind, **cls.to_dict(), "labels": list(cfg.labels)}
    out["final"] = {p: z for p, z in zip(st.current.labels, st.current.points)}
    if st.collision:
        out["collision"] = list(st.collision)
    if kind == "spider" and cls.estimate is not None:
        out["defect"] = teich.critical_orbit_defect(Fraction(spec["angle"]), cls.estimate)
    return out


def cmd_iterate(args) -> tuple[dict, int]:
    if args.manifest:
        spec = read_json(args.manifest)
        if not isinstance(spec, dict):
            raise InputError("run manifest must hold a JSON object")
        if args.mating:
            spec["enable_mating"] = True
    elif args.mating:
        spec = {"kind": "mating", "angles": args.mating.split(","), "enable_mating": True}
    elif args.angle:
        spec = {"kind": "spider", "angle": args.angle, "seed": args.seed}
    else:
        raise InputError("iterate needs --angle, --mating or --manifest")
    if args.steps is not None:
        spec["steps"] = args.steps
    if args.track is not None:
        spec["track"] = args.track
    th = spec.setdefault("thresholds", {})
    for key in ("window", "threshold"):
        if getattr(args, key) is not None:
            th[key] = getattr(args, key)
    try:
        return run_iteration(spec, args.csv), 0
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, DOMAIN_ERRORS):
            raise
        raise InputError(f"malformed run description: {exc}") from exc


# -- wiring --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcfkit", description=__doc__.splitlines()[0])
    p.add_argument("--json-indent", type=int, default=None, help="indent JSON output")
    p.add_argument("--tol", type=Fraction, default=Fraction(1, 10**9), help="eigenvalue enclosure width")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a recursion or manifest")
    s.add_argument("path")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("orbifold", help="orbifold signature and Euler characteristic")
    s.add_argument("path")
    s.set_defaults(func=cmd_orbifold)

    s = sub.add_parser("pull-back-curve", help="components of the preimage of one curve")
    s.add_argument("path")
    s.add_argument("word")
    s.set_defaults(func=cmd_pullback)

    s = sub.add_parser("matrix", help="transition matrix of a stable multicurve")
    s.add_argument("path")
    s.add_argument("words", nargs="*")
    s.add_argument("--curves", help="multicurve JSON file")
    s.set_defaults(func=cmd_matrix)

    s = sub.add_parser("obstruction", help="bounded search for an obstruction")
    s.add_argument("path")
    s.add_argument("--seeds", help="JSON list of seed multicurves")
    s.add_argument("--max-iter", type=int, default=10)
    s.add_argument("--max-classes", type=int, default=64)
    s.set_defaults(func=cmd_obstruction)

    s = sub.add_parser("decompose", help="cut along an invariant multicurve")
    s.add_argument("path")
    s.add_argument("curves", help="multicurve JSON file")
    s.add_argument("tree", nargs="?", help="tree JSON file (derived from the curves if omitted)")
    s.add_argument("--out", help="write the gluing manifest here")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("combine", help="glue pieces from a manifest")
    s.add_argument("manifest")
    s.add_argument("--out", help="write the glued recursion here")
    s.set_defaults(func=cmd_combine)

    s = sub.add_parser("iterate", help="numerical pullback iteration")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--angle", help="external angle p/q for the spider")
    g.add_argument("--mating", help="two angles p/q,r/s; enables the mating step")
    s.add_argument("--manifest", help="run description or replay JSON")
    s.add_argument("--steps", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--track", help="'all', 'none' or sides like 'a0,b0;a1,b1'")
    s.add_argument("--window", type=int)
    s.add_argument("--threshold", type=float)
    s.add_argument("--csv", help="write the per-step trace here")
    s.set_defaults(func=cmd_iterate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        out, code = args.func(args)
    except (InputError, FixtureFormatError, WordSyntaxError) as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}, args.json_indent))
        return 2
    except DOMAIN_ERRORS + (DomainFailure,) as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}, args.json_indent))
        return 1
    except OSError as exc:
        print(dumps({"error": "OSError", "message": str(exc)}, args.json_indent))
        return 2
    print(dumps(out, args.json_indent))
    return code


if __name__ == "__main__":
    sys.exit(main())
