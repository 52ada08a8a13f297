"""Relative error of the sampled p-radius against the exact value as k grows."""

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

from jsrlab import dist
from jsrlab.dist import MatrixDistribution
from jsrlab.pradius import p_radius_exact, p_radius_montecarlo


@dataclass
class Config:
    out: Path = Path("results/montecarlo")
    n_samples: int = 100_000
    ks: tuple = (5, 10, 20, 30, 40)
    seeds: tuple = (0, 1, 2)


def main(cfg):
    cfg.out.mkdir(parents=True, exist_ok=True)
    cases = {
        "example5": dist.example5(),
        "uniform01": dist.uniform_scalar(),
        "jordan": MatrixDistribution.point_mass([[0.5, 1.0], [0.0, 0.5]]),
    }
    with open(cfg.out / "errors.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case", "p", "k", "seed", "estimate", "exact", "rel_error"])
        for name, d in cases.items():
            for p in (1, 2):
                exact = p_radius_exact(d, p).value
                for k in cfg.ks:
                    for s in cfg.seeds:
                        mc = p_radius_montecarlo(d, p, k, cfg.n_samples, seed=s).value
                        rel = mc / exact - 1
                        w.writerow([name, p, k, s, f"{mc:.12g}", f"{exact:.12g}", f"{rel:.6g}"])
                        print(f"{name:10s} p={p} k={k:3d} seed={s} rel_error={rel:+.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Config.out)
    ap.add_argument("--samples", type=int, default=Config.n_samples)
    a = ap.parse_args()
    main(Config(out=a.out, n_samples=a.samples))
