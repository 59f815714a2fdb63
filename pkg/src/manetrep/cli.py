"""Command line entry point: ``manetrep run|sweep|check-props|apd eval``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import apd
from .harness.config import ConfigError, SimConfig, load_config
from .harness.propositions import (
    PropositionError,
    damage_bound,
    proposition_gains_collusion,
    proposition_gains_link,
)
from .harness.report import SUMMARY_HEADER, ReportError, emit_report, render_csv, summary_rows
from .harness.runner import run_simulation, sweep


def _load(args) -> SimConfig:
    if args.config:
        return load_config(args.config, seed=args.seed)
    return SimConfig() if args.seed is None else SimConfig(seed=args.seed)


def _counts(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_run(args) -> int:
    cfg = _load(args)
    result = run_simulation(cfg, keep_trace=args.trace)
    emit_report([result.report], args.out, "run", result.traces if args.trace else None)
    sys.stdout.write(render_csv(SUMMARY_HEADER, summary_rows([result.report])))
    for idx, h in enumerate(result.trace_hashes):
        print(f"# run {idx} trace sha256 {h}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    results = sweep(cfg, args.malicious, keep_trace=args.trace)
    traces = [t for r in results for t in r.traces] if args.trace else None
    emit_report([r.report for r in results], args.out, "sweep", traces)
    sys.stdout.write(render_csv(SUMMARY_HEADER, summary_rows(r.report for r in results)))
    return 0


def cmd_check_props(args) -> int:
    link = proposition_gains_link(args.psi1, args.psi2, args.alpha, args.phi)
    coll = proposition_gains_collusion(args.alpha, args.phi)
    print(f"link-breakage  theta_h={link.theta_h:.6f} theta_d={link.theta_d:.6f} margin={link.margin:.6f}")
    print(f"collusion      theta_h={coll.theta_h:.6f} theta_d={coll.theta_d:.6f} margin={coll.margin:.6f}")
    print(f"damage bound   {damage_bound(args.H, args.M, args.sigma, args.phi):.6f}")
    return 0 if link.margin >= 0 and coll.margin > 0 else 1


def cmd_apd_eval(args) -> int:
    res = apd.evaluate(
        args.old,
        apd.ApdInputs(c=args.c, e=args.e, z=args.z, p=args.p),
        args.count,
        args.M,
        args.phi,
        args.hop,
        args.penalty_mode,
    )
    grades = f"C={res.c_grade} E={res.e_grade} Z={res.z_grade}"
    if res.p_grade is not None:
        grades += f" P={res.p_grade}"
    print(grades)
    print(f"rho1={res.rho1} rho2={res.rho2} RAQ={res.raq} kappa={res.kappa}")
    print(f"new_score={res.new_score}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manetrep", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def sim_args(sp):
        sp.add_argument("--config", help="flat key=value config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--trace", action="store_true", help="also dump the event trace of every run")

    r = sub.add_parser("run", help="run one configuration")
    sim_args(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a configuration across malicious counts")
    sim_args(s)
    s.add_argument("--malicious", type=_counts, required=True, help="e.g. 0,5,10")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check-props", help="closed-form reputation gains and damage bound")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--phi", type=int, required=True)
    c.add_argument("--psi1", type=float, default=1.0)
    c.add_argument("--psi2", type=float, default=1.0)
    c.add_argument("--H", type=int, default=10)
    c.add_argument("--M", type=int, default=5)
    c.add_argument("--sigma", type=float, default=1.0)
    c.set_defaults(func=cmd_check_props)

    a = sub.add_parser("apd", help="penalty controller")
    asub = a.add_subparsers(dest="apd_command", required=True)
    e = asub.add_parser("eval", help="evaluate one penalty decision")
    e.add_argument("--c", type=float, required=True)
    e.add_argument("--e", type=float, required=True)
    e.add_argument("--z", type=float, required=True)
    e.add_argument("--p", type=float, default=None, help="omit for the delay variant")
    e.add_argument("--phi", type=int, required=True)
    e.add_argument("--hop", type=int, default=10)
    e.add_argument("--old", type=float, default=-1.0, help="current score of the suspect")
    e.add_argument("--count", type=int, default=1, help="suspicions so far")
    e.add_argument("--M", type=int, default=5)
    e.add_argument("--penalty-mode", default="literal", choices=("literal", "magnitude"))
    e.set_defaults(func=cmd_apd_eval)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PropositionError, apd.CrispRangeError, ReportError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
