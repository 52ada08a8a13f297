"""Limit-formula tables next to brute-force bounds for a few distributions."""

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from jsrlab import dist
from jsrlab.dist import MatrixDistribution
from jsrlab.jsr import jsr_gap_report, jsr_limit_formula


@dataclass
class Config:
    out: Path = Path("results/limit")
    p_max_scalar: int = 100
    p_max_box: int = 40
    p_max_pair: int = 16
    k_max: int = 12


def main(cfg):
    cfg.out.mkdir(parents=True, exist_ok=True)
    t = jsr_limit_formula(dist.uniform_scalar(), cfg.p_max_scalar)
    t.write_csv(cfg.out / "uniform01.csv")
    print("uniform [0,1]:", t.summary())

    t = jsr_limit_formula(dist.example5(), cfg.p_max_box)
    t.write_csv(cfg.out / "example5.csv")
    print("2x2 box:", t.summary())

    pair = MatrixDistribution.finite([np.diag([0.9, 0.2]), np.diag([0.2, 0.9])])
    r = jsr_gap_report(pair, cfg.p_max_pair, cfg.k_max)
    r.table.write_csv(cfg.out / "pair.csv")
    r.write_csv(cfg.out / "pair_gap.csv")
    print("diagonal pair:", r.table.summary())

    signed = MatrixDistribution.finite([[[0.5, -0.6], [0.3, 0.4]], [[0.2, 0.7], [-0.5, 0.1]]])
    r = jsr_gap_report(signed, cfg.p_max_pair, cfg.k_max)
    r.table.write_csv(cfg.out / "signed.csv")
    print("signed pair (even p):", r.table.summary())


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Config.out)
    main(Config(out=ap.parse_args().out))
