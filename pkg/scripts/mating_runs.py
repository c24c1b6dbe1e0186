"""Formal matings: iterate, classify, and optionally dump the proxy histories.

    python scripts/mating_runs.py --pairs 1/3,1/3 1/7,1/7 1/6,0 --csv out.csv
"""

import argparse
import csv
from dataclasses import dataclass, field
from fractions import Fraction

from pcfkit import teich


@dataclass
class Config:
    pairs: list = field(default_factory=lambda: [(Fraction(1, 3), Fraction(1, 3))])
    steps: int = 100
    window: int = 20
    track_all: bool = True


def run_pair(theta1: Fraction, theta2: Fraction, cfg: Config):
    tracked = teich.bipartitions(teich.mating_start(theta1, theta2).labels) if cfg.track_all else []
    return teich.run_mating(theta1, theta2, cfg.steps, tracked, cfg.window)


def _pair(text: str) -> tuple[Fraction, Fraction]:
    a, b = text.split(",")
    return Fraction(a), Fraction(b)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", nargs="+", type=_pair, default=[(Fraction(1, 3), Fraction(1, 3))])
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--window", type=int, default=20)
    ap.add_argument("--no-track", action="store_true")
    ap.add_argument("--csv", help="long-format proxy histories")
    args = ap.parse_args()
    cfg = Config(args.pairs, args.steps, args.window, not args.no_track)
    rows = []
    for a, b in cfg.pairs:
        st, cls = run_pair(a, b, cfg)
        floor = "-" if cls.floor is None else f"{cls.floor:.3f}"
        print(f"{a}|{b}: {cls.kind} after {cls.steps} steps, shrinking={list(cls.shrinking)}, floor={floor}")
        for name, seq in st.proxies.items():
            rows += [(f"{a}|{b}", name, k, v) for k, v in enumerate(seq)]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pair", "class", "iteration", "proxy"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
