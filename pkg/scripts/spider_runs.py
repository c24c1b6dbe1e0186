"""Spider runs from random starts for a list of angles.

    python scripts/spider_runs.py --angles 1/6 1/7 1/3 --starts 20
"""

import argparse
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from pcfkit import teich


@dataclass
class Config:
    angles: list = field(default_factory=lambda: [Fraction(1, 6)])
    starts: int = 20
    steps: int = 200
    seed: int = 0
    tol: float = 1e-10


def run(cfg: Config) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for theta in cfg.angles:
        results = [teich.run_spider(theta, cfg.steps, rng, tol=cfg.tol)[1] for _ in range(cfg.starts)]
        done = [r for r in results if r.kind == "Converged"]
        cs = [r.estimate for r in done]
        rows.append(
            {
                "angle": str(theta),
                "converged": f"{len(done)}/{len(results)}",
                "median_steps": statistics.median(r.steps for r in done) if done else None,
                "c": cs[0] if cs else None,
                "spread": max(abs(c - cs[0]) for c in cs) if cs else None,
                "max_defect": max(teich.critical_orbit_defect(theta, c) for c in cs) if cs else None,
            }
        )
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--angles", nargs="+", type=Fraction, default=[Fraction(1, 6)])
    ap.add_argument("--starts", type=int, default=20)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = Config(args.angles, args.starts, args.steps, args.seed)
    for row in run(cfg):
        c = row["c"]
        c_text = "-" if c is None else f"{c.real:+.10f}{c.imag:+.10f}i"
        print(
            f"{row['angle']:>6}  {row['converged']:>6}  steps~{row['median_steps']}  c={c_text}  "
            f"spread={row['spread']:.1e}  defect={row['max_defect']:.1e}"
        )


if __name__ == "__main__":
    main()
