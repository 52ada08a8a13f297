"""Command-line entry point.

Exit status: 0 on success, 1 on bad input (malformed or missing files, bad
flags), 2 when an assumption, a rate bound or a numerical routine fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dist as dist_mod
from .errors import (
    AssumptionViolated,
    BudgetExceeded,
    DegenerateFit,
    DimensionCapError,
    EigensolverFailure,
    GammaTooSmall,
    JsrlabError,
    SpecError,
)
from .jsr import GapViolation, jsr_gap_report, jsr_limit_formula
from .lyapunov import (
    LyapunovCertificate,
    euclidean_norm,
    synth_cone_norm,
    synth_quadratic,
    verify_certificate,
)
from .pradius import p_radius_exact, p_radius_montecarlo
from .simulate import (
    level_set,
    simulate_stochastic,
    write_levels_csv,
    write_paths_csv,
    write_stats_csv,
)

EXIT_OK, EXIT_INPUT, EXIT_FAILURE = 0, 1, 2
FAILURES = (
    AssumptionViolated,
    GammaTooSmall,
    EigensolverFailure,
    DegenerateFit,
    DimensionCapError,
    BudgetExceeded,
    GapViolation,
)


def fmt(v):
    return f"{v:.12g}"


@dataclass
class RunConfig:
    subcommand: str
    dist: Path
    out: Path = Path("out")
    seed: int = 0
    threads: int = 1
    p: list = field(default_factory=list)
    p_max: int | None = None
    gamma: float | None = None
    k_max: int | None = None
    even_only: bool | None = None
    mc: bool = False
    k: int = 30
    n_samples: int = 100_000
    horizon: int = 50
    n_paths: int = 200
    x0: list | None = None
    certs: list = field(default_factory=list)
    form: str = "auto"

    def __post_init__(self):
        if self.seed < 0:
            raise SpecError("must be nonnegative", "seed")
        if self.threads < 1:
            raise SpecError("must be at least 1", "threads")
        if any(q < 1 for q in self.p):
            raise SpecError("entries must be positive integers", "p")
        if self.p_max is not None and self.p_max < 1:
            raise SpecError("must be a positive integer", "pmax")
        if self.k_max is not None and self.k_max < 1:
            raise SpecError("must be a positive integer", "kmax")
        if self.horizon < 1:
            raise SpecError("must be at least 1", "steps")
        if self.n_paths < 1:
            raise SpecError("must be at least 1", "paths")
        if self.k < 1 or self.n_samples < 1:
            raise SpecError("must be positive", "k/samples")


def _int_list(text):
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _default_threads():
    try:
        return max(1, int(os.environ.get("JSRLAB_THREADS", "1")))
    except ValueError:
        return 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", required=True, type=Path, help="distribution JSON file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (fallback: JSRLAB_THREADS)")

    parser = argparse.ArgumentParser(prog="jsrlab", description="p-radius and JSR toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("pradius", parents=[common], help="p-radius for one or more p")
    sp.add_argument("--p", type=_int_list, required=True, help="e.g. 2 or 1,2,4")
    sp.add_argument("--mc", action="store_true", help="also report a Monte Carlo estimate")
    sp.add_argument("--k", type=int, default=30, help="product length for --mc")
    sp.add_argument("--samples", type=int, default=100_000)

    sj = sub.add_parser("jsr", parents=[common], help="limit-formula table and gap report")
    sj.add_argument("--pmax", type=int, required=True)
    sj.add_argument("--even-only", action="store_true", default=None)
    sj.add_argument("--kmax", type=int, default=None, help="brute-force depth (finite only)")

    sl = sub.add_parser("lyapunov", parents=[common], help="synthesize and verify a certificate")
    sl.add_argument("--p", type=int, required=True)
    sl.add_argument("--gamma", type=float, required=True)
    sl.add_argument("--form", choices=["auto", "quadratic", "cone_norm"], default="auto")

    ss = sub.add_parser("simulate", parents=[common], help="sample paths and statistics")
    ss.add_argument("--x0", type=_float_list, required=True, help="e.g. 0,1")
    ss.add_argument("--steps", type=int, default=50)
    ss.add_argument("--paths", type=int, default=200)
    ss.add_argument("--cert", type=Path, action="append", default=[], help="certificate JSON")
    return parser


def config_from_args(ns):
    threads = ns.threads if ns.threads is not None else _default_threads()
    kw = dict(subcommand=ns.subcommand, dist=ns.dist, out=ns.out, seed=ns.seed, threads=threads)
    if ns.subcommand == "pradius":
        kw.update(p=ns.p, mc=ns.mc, k=ns.k, n_samples=ns.samples)
    elif ns.subcommand == "jsr":
        kw.update(p_max=ns.pmax, even_only=ns.even_only, k_max=ns.kmax)
    elif ns.subcommand == "lyapunov":
        kw.update(p=[ns.p], gamma=ns.gamma, form=ns.form)
    else:
        kw.update(x0=ns.x0, horizon=ns.steps, n_paths=ns.paths, certs=list(ns.cert))
    return RunConfig(**kw)


def cmd_pradius(cfg, d):
    path = cfg.out / "pradius.csv"
    rows = []
    for p in cfg.p:
        res = p_radius_exact(d, p)
        rows.append((p, res.value, res.method, res.assumption_used))
        if cfg.mc:
            mc = p_radius_montecarlo(d, p, cfg.k, cfg.n_samples, seed=cfg.seed, threads=cfg.threads)
            rows.append((p, mc.value, mc.method, mc.assumption_used))
    print("p\tvalue\tmethod\tassumption")
    for p, v, m, a in rows:
        print(f"{p}\t{fmt(v)}\t{m}\t{a}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "value", "method", "assumption"])
        for p, v, m, a in rows:
            w.writerow([p, fmt(v), m, a])
    return EXIT_OK


def cmd_jsr(cfg, d):
    if cfg.k_max is not None and d.kind == dist_mod.FINITE:
        report = jsr_gap_report(d, cfg.p_max, cfg.k_max, cfg.even_only)
        table = report.table
        report.write_csv(cfg.out / "gap.csv")
    else:
        table = jsr_limit_formula(d, cfg.p_max, cfg.even_only)
    table.write_csv(cfg.out / "jsr.csv")
    print("p\testimate\tmethod")
    for r in table.rows:
        print(f"{r.p}\t{fmt(r.estimate)}\t{r.method}")
    print(table.summary())
    return EXIT_OK


def cmd_lyapunov(cfg, d):
    p, gamma = cfg.p[0], cfg.gamma
    form = cfg.form
    if form == "auto":
        form = "quadratic" if p % 2 == 0 else "cone_norm"
    if form == "quadratic":
        cert = synth_quadratic(d, p, gamma)
    else:
        cert = synth_cone_norm(d, p, gamma)
    report = verify_certificate(d, cert, mode="exact")
    mc = verify_certificate(d, cert, mode="montecarlo", seed=cfg.seed)
    cert.save(cfg.out / "cert.json")
    doc = {
        "exact": {"status": report.status, "residual": report.residual, "target": report.target,
                  "min_eig": report.min_eig, "C1": report.C1, "C2": report.C2, "notes": report.notes},
        "montecarlo": {"status": mc.status, "max_ratio": mc.max_ratio,
                       "max_ratio_se": mc.max_ratio_se, "target": mc.target},
    }
    (cfg.out / "verification.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"form={cert.form} degree={cert.degree} gamma={fmt(gamma)} lifted={cert.lifted}")
    if cert.form == "cone_norm":
        print("g = " + " ".join(fmt(v) for v in cert.g))
    else:
        print(f"min_eig(H) = {fmt(cert.min_eig())}")
    print(f"exact: {report.status} residual={fmt(report.residual)}")
    print(f"montecarlo: {mc.status} max_ratio={fmt(mc.max_ratio)} target={fmt(mc.target)}")
    return EXIT_OK if report.passed else EXIT_FAILURE


def cmd_simulate(cfg, d):
    x0 = np.array(cfg.x0, dtype=float)
    if x0.size != d.dim:
        raise SpecError(f"expected {d.dim} components, got {x0.size}", "x0")
    certs = [LyapunovCertificate.load(c) for c in cfg.certs]
    for c in certs:
        if c.dim != d.dim:
            raise SpecError(f"certificate dimension {c.dim} != {d.dim}", "cert")
    ens = simulate_stochastic(d, x0, cfg.horizon, cfg.n_paths, cfg.seed, certs, cfg.threads)
    write_paths_csv(ens, cfg.out / "paths.csv")
    write_stats_csv(ens, cfg.out / "stats.csv")
    if d.dim == 2:
        # evaluator 0 is the Euclidean norm, then the certificates in flag order
        evaluators = [euclidean_norm] + certs
        levels = []
        for i, V in enumerate(evaluators):
            c = float(V(x0))
            if c > 0:
                levels.append((i, c, level_set(V, c)))
        write_levels_csv(levels, cfg.out / "levels.csv")
    print(f"final mean_norm={fmt(ens.mean_norm[-1])}")
    for j, m in enumerate(ens.mean_V):
        print(f"final mean_V_{j + 1}={fmt(m[-1])}")
    return EXIT_OK


COMMANDS = {"pradius": cmd_pradius, "jsr": cmd_jsr, "lyapunov": cmd_lyapunov,
            "simulate": cmd_simulate}


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = config_from_args(ns)
        d = dist_mod.load(cfg.dist)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[cfg.subcommand](cfg, d)
    except FAILURES as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (SpecError, OSError, ValueError, JsrlabError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
