"""Command-line front end.

    jscs sweep --target total --pu-snr-db -20 -15 -10 --source-snr-db 10 --out figs/
    jscs optimize
    jscs simulate --slots 100000 --seed 42
    jscs validate
    jscs calibrate

Exit codes: 0 success, 2 config error, 3 infeasible distortion,
4 validation failure.
"""

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from jscs import appos, config as cfg, sensing
from jscs.appos import InfeasibleDistortionError
from jscs.montecarlo import SimConfig, SimConfigError, statistic_moments_z, validate_against_analytic
from jscs.optimizer import BracketError, Optimum, calibrate, minimize
from jscs.parallel import ordered_map
from jscs.validation import run_checks

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_VALIDATION = 0, 2, 3, 4

TARGETS = {
    "amos": "p_amos_w",
    "appos": "p_appos_w",
    "total": "p_total_w",
}


def fmt(v) -> str:
    return f"{v:.9g}"


def _flatten(values):
    if not values:
        return None
    return [v for item in values for v in (item if isinstance(item, list) else [item])]


def _combos(config, pu_list, src_list):
    pu_list, src_list = _flatten(pu_list), _flatten(src_list)
    pu_list = pu_list or [config.pu_snr_db]
    src_list = src_list or [config.source_snr_db]
    return [(pu, src) for pu in pu_list for src in src_list]


def sweep_table(config: cfg.ScenarioConfig, target: str):
    """Columns (p_t, power, n_samples, regime) for one scenario."""
    if target not in TARGETS:
        raise cfg.ConfigError(f"unknown sweep target {target!r}")
    senv, aenv = config.senv, config.aenv
    grid = config.sweep.grid()
    if grid[0] <= 0 or grid[-1] >= senv.p_h0:
        raise cfg.ConfigError(f"sweep range must lie inside (0, p_h0={senv.p_h0})")
    n = sensing.n_of_p_t(grid, senv)
    amos = n * senv.e_sample / senv.slot_len
    if target == "amos":
        power = amos
    else:
        power = appos.p_appos(grid, aenv, senv)
        if target == "total":
            power = amos + power
    regime = np.where(n > 0, "Sensing", "NoSensing")
    return grid, power, n, regime


def cmd_sweep(config: cfg.ScenarioConfig, target: str, pu_list=None, src_list=None) -> dict:
    """CSV text per (PU SNR, source SNR) combination."""
    def one(combo):
        grid, power, n, regime = sweep_table(config.with_snrs(*combo), target)
        lines = [f"p_t,{TARGETS[target]},n_samples,regime"]
        lines += [f"{fmt(p)},{fmt(w)},{fmt(k)},{r}" for p, w, k, r in zip(grid, power, n, regime)]
        return "\n".join(lines) + "\n"

    combos = _combos(config, pu_list, src_list)
    return dict(zip(combos, ordered_map(one, combos)))


def sweep_filename(target, pu, src):
    return f"{target}_pu{pu:+g}dB_src{src:+g}dB.csv"


@dataclass
class OptimizeRow:
    pu_snr_db: float
    source_snr_db: float
    optimum: Optimum


OPT_COLUMNS = ("pu_snr_db", "source_snr_db", "p_t", "p_total_w", "p_amos_w", "p_appos_w",
               "amos_share", "n_samples", "certified_convex", "iterations")


def _opt_values(row: OptimizeRow):
    pt = row.optimum.point
    return (row.pu_snr_db, row.source_snr_db, pt.p_t, pt.p_total_w, pt.p_amos_w, pt.p_appos_w,
            pt.amos_share, pt.n_samples, row.optimum.certified_convex, row.optimum.iterations)


def cmd_optimize(config: cfg.ScenarioConfig, pu_list=None, src_list=None, tol_pt=None):
    tol = tol_pt if tol_pt is not None else config.tol_pt

    def one(combo):
        c = config.with_snrs(*combo)
        return OptimizeRow(combo[0], combo[1], minimize(c.senv, c.aenv, tol))

    return ordered_map(one, _combos(config, pu_list, src_list))


def optimize_csv(rows) -> str:
    lines = [",".join(OPT_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(v).lower() if isinstance(v, bool) else fmt(v) for v in _opt_values(row)))
    return "\n".join(lines) + "\n"


def optimize_table(rows) -> str:
    lines = []
    for row in rows:
        pt, opt = row.optimum.point, row.optimum
        lines += [
            f"PU SNR {row.pu_snr_db:g} dB, source SNR {row.source_snr_db:g} dB",
            f"  p_t*             {pt.p_t:.6f}",
            f"  P_total*         {pt.p_total_w:.6f} W",
            f"  P_AmOS*          {pt.p_amos_w:.6f} W",
            f"  P_AppOS*         {pt.p_appos_w:.6f} W",
            f"  AmOS share       {100 * pt.amos_share:.3f} %",
            f"  N*               {pt.n_samples:.2f}",
            f"  regime           {pt.regime.value}",
            f"  certified convex {opt.certified_convex}",
            f"  iterations       {opt.iterations} ({opt.solver.value})",
        ]
    return "\n".join(lines) + "\n"


def cmd_simulate(config: cfg.ScenarioConfig, n_slots: int, seed: int, n_samples=None,
                 signal_model="gaussian", mpsk_order=4):
    """Monte-Carlo run at ``n_samples`` (default: ceil of N at the optimum)."""
    senv = config.senv
    if n_samples is None:
        opt = minimize(senv, config.aenv, config.tol_pt)
        n_samples = math.ceil(opt.point.n_samples)
    if n_samples < 1:
        raise SimConfigError(
            f"n_samples={n_samples}: the sensing simulation needs at least one sample; "
            "pass --n-samples >= 1 or pick a scenario whose optimum lies in the sensing regime"
        )
    sim = SimConfig(senv, n_slots, int(n_samples), seed, signal_model, mpsk_order)
    return sim, validate_against_analytic(sim)


def simulate_report(sim: SimConfig, report) -> str:
    st = report.stats
    lines = [
        f"slots {sim.n_slots} (H0 {st.slots_h0}, H1 {st.slots_h1}), N = {sim.n_samples}, "
        f"seed {sim.seed}, signal {sim.signal_model}",
        f"threshold {fmt(sim.threshold)}",
        f"{'quantity':<12}{'empirical':>12}{'95% CI':>26}{'analytic':>12}{'z':>9}",
    ]
    for key, rate in (("p_d", st.emp_p_d), ("p_fa", st.emp_p_fa), ("p_t", st.emp_p_t)):
        ci = f"[{rate.lo:.6f}, {rate.hi:.6f}]"
        lines.append(f"{key:<12}{rate.value:>12.6f}{ci:>26}{report.analytic[key]:>12.6f}"
                     f"{report.z_scores[key]:>9.3f}")
    c = st.emp_p_collision
    lines.append(f"{'p_collision':<12}{c.value:>12.6f}{f'[{c.lo:.6f}, {c.hi:.6f}]':>26}"
                 f"{sim.senv.collision_prob:>12.6f}")
    moments = statistic_moments_z(sim, st)
    lines.append("T(y) moment z-scores: " + ", ".join(f"{k} {v:.3f}" for k, v in moments.items()))
    lines.append(f"validation {'PASS' if report.passed else 'FAIL'} (|z| <= {report.z_limit:g})")
    return "\n".join(lines) + "\n"


def cmd_validate(config: cfg.ScenarioConfig, appos_deriv=None):
    return run_checks(config.senv, config.aenv, appos_deriv=appos_deriv)


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="jscs", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario file (INI sections sensing/source/sweep/solver)")
    common.add_argument("--pu-snr-db", type=_float_list, nargs="+", action="extend",
                        help="PU SNRs in dB, space- or comma-separated (e.g. -20 -15 -10)")
    common.add_argument("--source-snr-db", type=_float_list, nargs="+", action="extend",
                        help="source SNRs in dB, space- or comma-separated")
    common.add_argument("--out", type=Path, help="output file or directory")
    common.add_argument("--tol-pt", type=float, help="optimizer tolerance in p_t")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="power vs p_t curves as CSV")
    p.add_argument("--target", choices=sorted(TARGETS), default="total")
    sub.add_parser("optimize", parents=[common], help="minimum total power operating point")
    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo check of the detector model")
    p.add_argument("--slots", type=int, default=100_000)
    p.add_argument("--seed", type=_u64, default=42)
    p.add_argument("--n-samples", type=int, help="detector samples per slot (default: ceil of optimal N)")
    p.add_argument("--signal", choices=("gaussian", "mpsk"), default="gaussian")
    p.add_argument("--mpsk-order", type=int, default=4)
    sub.add_parser("validate", parents=[common], help="model self-checks")
    p = sub.add_parser("calibrate", parents=[common], help="fit slot length and N0 to a reported optimum")
    p.add_argument("--p-t", type=float, default=0.42)
    p.add_argument("--total-w", type=float, default=4.8)
    return parser


def _emit(text, out: Path = None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(text.encode("utf-8"))


def _run(args) -> int:
    config = cfg.load(args.config) if args.config else cfg.ScenarioConfig()

    if args.command == "sweep":
        tables = cmd_sweep(config, args.target, args.pu_snr_db, args.source_snr_db)
        if args.out is None and len(tables) == 1:
            _emit(next(iter(tables.values())))
        elif args.out is not None and args.out.suffix == ".csv" and len(tables) == 1:
            _emit(next(iter(tables.values())), args.out)
        else:
            outdir = args.out or Path(".")
            for (pu, src), text in tables.items():
                path = outdir / sweep_filename(args.target, pu, src)
                _emit(text, path)
                print(path)
        return EXIT_OK

    if args.command == "optimize":
        rows = cmd_optimize(config, args.pu_snr_db, args.source_snr_db, args.tol_pt)
        sys.stdout.write(optimize_table(rows))
        if args.out is not None:
            _emit(optimize_csv(rows), args.out)
        return EXIT_OK

    if args.command == "simulate":
        combos = _combos(config, args.pu_snr_db, args.source_snr_db)
        ok = True
        for pu, src in combos:
            c = config.with_snrs(pu, src)
            sim, report = cmd_simulate(c, args.slots, args.seed, args.n_samples, args.signal, args.mpsk_order)
            text = simulate_report(sim, report)
            sys.stdout.write(text)
            if args.out is not None:
                _emit(text, args.out)
            ok = ok and report.passed
        return EXIT_OK if ok else EXIT_VALIDATION

    if args.command == "validate":
        ok = True
        for pu, src in _combos(config, args.pu_snr_db, args.source_snr_db):
            print(f"PU SNR {pu:g} dB, source SNR {src:g} dB")
            for r in cmd_validate(config.with_snrs(pu, src)):
                print(f"  [{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
                ok = ok and r.passed
        return EXIT_OK if ok else EXIT_VALIDATION

    if args.command == "calibrate":
        cal = calibrate(config.senv, config.aenv, args.p_t, args.total_w)
        print(f"slot length T   {cal.slot_len:.6g} s")
        print(f"noise PSD N0    {cal.n0:.6g} W/Hz")
        print(f"AmOS share      {100 * cal.amos_share:.3f} % (predicted)")
        return EXIT_OK
    return EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except InfeasibleDistortionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (cfg.ConfigError, SimConfigError, BracketError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
