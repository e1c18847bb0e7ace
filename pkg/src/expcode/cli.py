"""Command-line front end.

Subcommands emit CSV (default) or JSON tables:

  level-table   per-level p_l, q_l, p_l*q_l, q~_l and R1/R2 rates
  rates-sweep   capacity and R1/R2 totals for C1/C2 over an SNR grid
  gap-cert      high-SNR capacity-gap certificate for a target epsilon
  validate      statistical checks of the exponential digit model
  simulate      Monte Carlo per-level statistics next to analytic values

Exit codes: 0 success, 1 failed check, 2 usage error.
"""

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

import numpy as np

from . import rates as R
from .expansion import BernoulliProfile, ExponentialSpec, LevelRange, level_profile
from .infotheory import DomainError, bernoulli_convolve, bsc_rate, db_to_linear
from .simulator import SimConfig, SimMode, simulate
from .validation import MIN_SAMPLES, validate_expansion

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

LEVEL_TABLE_COLUMNS = ["level", "p_l", "q_l", "p_conv_q", "q_tilde", "rate_r1", "rate_r2"]
SWEEP_COLUMNS = ["snr_db", "capacity", "r1_c1", "r1_c2", "r2_c1", "r2_c2"]
GAP_COLUMNS = ["epsilon", "c_const", "gamma_required", "l_required", "gamma_min", "l_min",
               "gamma", "L", "achieved_gap", "c_hat", "status"]
VALIDATE_COLUMNS = ["check", "statistic", "threshold", "status"]
SIMULATE_COLUMNS = ["level", "p_l", "q_l", "q_tilde", "c_model", "reference_crossover",
                    "empirical_crossover", "discrepancy", "measured_carry", "empirical_mi",
                    "analytic_rate", "sample_count"]


class UsageError(Exception):
    pass


def load_schema(command):
    """JSON schema shipped for a subcommand's ``--format json`` output."""
    text = resources.files("expcode").joinpath("schemas", f"{command}.json").read_text()
    return json.loads(text)


def fmt(x):
    """Fixed 9-significant-digit rendering shared by CSV and JSON."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.9g}")
    return x


def _csv_cell(x):
    x = fmt(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def render(columns, rows, fmt_name, meta=None, comments=()):
    if fmt_name == "json":
        doc = {"columns": columns, "rows": [{c: fmt(r[c]) for c in columns} for r in rows]}
        if meta is not None:
            doc["meta"] = {k: fmt(v) for k, v in meta.items()}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_csv_cell(r[c]) for c in columns])
    for line in comments:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def parse_snr_grid(text):
    """``a``, ``a:step:b`` (inclusive) or ``a,b,c`` in dB."""
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            a, step, b = parts
            if step <= 0:
                raise UsageError("--snr-db step must be positive")
            count = math.floor((b - a) / step + 1e-9) + 1
            return [round(a + k * step, 10) for k in range(max(count, 0))]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse --snr-db {text!r}") from None


def _channel(args, snr_db):
    return R.ChannelSpec.from_snr(db_to_linear(snr_db), args.noise_mean)


def _window(args, channel, default_levels=None, default_l=None):
    if args.l1 is not None or args.l2 is not None:
        if args.l1 is None or args.l2 is None:
            raise UsageError("--l1 and --l2 must be given together")
        return LevelRange.symmetric(args.l1, args.l2)
    if args.levels is not None:
        return R.default_window(channel, args.levels)
    if default_levels is not None:
        return R.default_window(channel, default_levels)
    g = channel.integer_gamma()
    g = g if g is not None else math.ceil(channel.gamma)
    return LevelRange(-default_l, g + default_l)


def cmd_level_table(args):
    if args.snr_db is not None:
        grid = parse_snr_grid(args.snr_db)
        if len(grid) != 1:
            raise UsageError("level-table takes a single --snr-db value")
        channel = _channel(args, grid[0])
    else:
        channel = R.ChannelSpec.from_gamma(args.gamma, args.noise_mean)
    rng = _window(args, channel, default_l=args.L)
    inp = R.input_profile(channel, args.dist, rng)
    if args.p_const is not None:
        inp = R.ShapedInput(BernoulliProfile.constant(rng, args.p_const), inp.duty)
    q = R.noise_profile(channel, rng)
    qt = R.effective_noise_profile(inp.profile, q)
    r1 = bsc_rate(inp.profile.probs, qt.probs)
    r2 = bsc_rate(inp.profile.probs, q.probs)
    rows = [
        {"level": int(l), "p_l": p, "q_l": qq, "p_conv_q": bernoulli_convolve(p, qq),
         "q_tilde": t, "rate_r1": a, "rate_r2": b}
        for l, p, qq, t, a, b in zip(rng.levels, inp.profile.probs, q.probs, qt.probs, r1, r2)
    ]
    columns = _scheme_columns(LEVEL_TABLE_COLUMNS, args.scheme)
    meta = {"snr": channel.snr, "gamma": channel.gamma, "e_x": channel.e_x, "e_n": channel.e_n,
            "dist": args.dist, "duty": inp.duty, "l_min": rng.l_min, "l_max": rng.l_max,
            "capacity": channel.capacity,
            "r1_total": inp.duty * float(np.sum(r1)), "r2_total": inp.duty * float(np.sum(r2))}
    return render(columns, rows, args.format, meta), EXIT_OK


def _scheme_columns(columns, scheme):
    drop = {"r1": ("2",), "r2": ("1",), "both": ()}[scheme]
    return [c for c in columns
            if not any(c.startswith(f"rate_r{d}") or c.startswith(f"r{d}_") for d in drop)]


def cmd_rates_sweep(args):
    grid = parse_snr_grid(args.snr_db or "0:1:30")
    if not grid:
        raise UsageError("empty SNR sweep")
    rows = []
    for db in grid:
        channel = _channel(args, db)
        rng = _window(args, channel, default_levels=41)
        row = {"snr_db": db, "capacity": channel.capacity}
        for choice in R.InputChoice:
            r1, r2 = R.channel_rates(channel, choice, rng)
            row[f"r1_{choice.value}"] = r1.total
            row[f"r2_{choice.value}"] = r2.total
        rows.append(row)
    columns = _scheme_columns(SWEEP_COLUMNS, args.scheme)
    if args.dist != "both":
        columns = [c for c in columns if not c[:3] in ("r1_", "r2_") or c.endswith(args.dist)]
    return render(columns, rows, args.format), EXIT_OK


def cmd_gap_cert(args):
    if not args.epsilon > 0:
        raise UsageError(f"--epsilon must be positive, got {args.epsilon}")
    gamma_min, l_min = R.minimal_gap_parameters(args.epsilon)
    if args.snr_db is not None:
        grid = parse_snr_grid(args.snr_db)
        if len(grid) != 1:
            raise UsageError("gap-cert takes a single --snr-db value")
        channel = R.ChannelSpec.from_snr(db_to_linear(grid[0]))
    elif args.gamma is not None:
        channel = R.ChannelSpec.from_gamma(args.gamma)
    else:
        channel = R.ChannelSpec.from_gamma(gamma_min)
    L = args.L if args.L is not None else l_min
    try:
        cert = R.gap_certificate(args.epsilon, channel, L)
    except R.PreconditionError as exc:
        raise UsageError(str(exc)) from None
    status = {True: "PASS", False: "FAIL", None: "PRECONDITIONS_NOT_MET"}[cert.certified]
    row = {"epsilon": cert.epsilon, "c_const": cert.c_const,
           "gamma_required": cert.gamma_required, "l_required": cert.l_required,
           "gamma_min": gamma_min, "l_min": l_min, "gamma": cert.gamma, "L": cert.L,
           "achieved_gap": cert.achieved_gap, "c_hat": cert.c_hat, "status": status}
    code = EXIT_FAIL if cert.certified is False else EXIT_OK
    return render(GAP_COLUMNS, [row], args.format), code


def cmd_validate(args):
    n = args.trials * args.blocklength
    if n < MIN_SAMPLES:
        raise UsageError(f"validate needs trials*blocklength >= {MIN_SAMPLES}, got {n}")
    if not args.lam > 0:
        raise UsageError("--lambda must be positive")
    spec = ExponentialSpec(args.lam)
    l1 = 20 if args.l1 is None else args.l1
    l2 = 20 if args.l2 is None else args.l2
    rng = LevelRange.symmetric(l1, l2)
    profile = None
    if args.perturb:
        try:
            level, delta = args.perturb.split(":")
            profile = level_profile(spec, rng).perturbed(int(level), float(delta))
        except ValueError:
            raise UsageError(f"--perturb expects LEVEL:DELTA, got {args.perturb!r}") from None
    results = validate_expansion(spec, rng, args.trials, args.blocklength, args.seed,
                                 profile=profile, ks_threshold=args.ks_threshold)
    rows = [{"check": r.name, "statistic": r.statistic, "threshold": r.threshold,
             "status": "PASS" if r.passed else "FAIL"} for r in results]
    ok = all(r.passed for r in results)
    meta = {"lambda": args.lam, "samples": n, "seed": args.seed, "l_min": rng.l_min,
            "l_max": rng.l_max, "all_passed": ok}
    return render(VALIDATE_COLUMNS, rows, args.format, meta), EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args):
    grid = parse_snr_grid(args.snr_db or "30")
    if len(grid) != 1:
        raise UsageError("simulate takes a single --snr-db value")
    channel = _channel(args, grid[0])
    rng = _window(args, channel, default_levels=41)
    config = SimConfig(channel, rng, args.dist, args.mode, blocklength=args.blocklength,
                       trials=args.trials, seed=args.seed)
    report = simulate(config, workers=args.workers)
    inp = config.shaped_input()
    q = R.noise_profile(channel, rng)
    qt = R.effective_noise_profile(inp.profile, q)
    c = R.carry_profile(inp.profile, q)
    reference = q.probs if config.mode is SimMode.GENIE_STRIP else qt.probs
    analytic = bsc_rate(inp.profile.probs, reference)
    rows = []
    for k, st in enumerate(report.per_level):
        rows.append({
            "level": st.level, "p_l": inp.profile.probs[k], "q_l": q.probs[k],
            "q_tilde": qt.probs[k], "c_model": c.probs[k],
            "reference_crossover": reference[k], "empirical_crossover": st.empirical_crossover,
            "discrepancy": st.empirical_crossover - reference[k],
            "measured_carry": st.measured_carry_rate, "empirical_mi": st.empirical_mi,
            "analytic_rate": analytic[k], "sample_count": st.sample_count,
        })
    meta = {
        "mode": config.mode.value, "dist": config.input_choice.value, "snr": channel.snr,
        "e_x": channel.e_x, "e_n": channel.e_n, "l_min": rng.l_min, "l_max": rng.l_max,
        "seed": args.seed, "trials": args.trials, "blocklength": args.blocklength,
        "duty": report.duty, "active_symbols": report.active_symbols,
        "overflow_count": report.overflow_count,
        "noise_overflow_count": report.noise_overflow_count,
        "carry_out_count": report.carry_out_count,
        "energy_estimate": report.energy_estimate, "energy_stderr": report.energy_stderr,
        "rate_estimate": report.rate_estimate,
        "analytic_rate_total": report.duty * float(np.sum(analytic)),
    }
    comments = [f"{k}={_csv_cell(v)}" for k, v in meta.items()]
    return render(SIMULATE_COLUMNS, rows, args.format, meta, comments), EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="expcode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dist_choices=("c1", "c2"), dist_default="c1"):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--out", help="output path (default: standard output)")
        p.add_argument("--levels", type=int, help="total level count, window split around gamma")
        p.add_argument("--l1", type=int, help="levels below zero (window starts at -L1)")
        p.add_argument("--l2", type=int, help="highest level L2")
        p.add_argument("--dist", choices=dist_choices, default=dist_default)
        p.add_argument("--scheme", choices=["r1", "r2", "both"], default="both")
        p.add_argument("--noise-mean", type=float, default=1.0, help="E_N (default 1)")
        p.add_argument("--snr-db", help="SNR in dB: a, a:step:b or a,b,c")

    p = sub.add_parser("level-table", help="per-level profile and rates")
    common(p)
    p.add_argument("--gamma", type=int, default=15, help="SNR = 2^gamma - 1 when --snr-db is absent")
    p.add_argument("--L", type=int, default=5, help="window [-L, gamma+L]")
    p.add_argument("--p-const", type=float, help="override every p_l with this value")
    p.set_defaults(func=cmd_level_table)

    p = sub.add_parser("rates-sweep", help="R1/R2 totals over an SNR grid")
    common(p, ("c1", "c2", "both"), "both")
    p.set_defaults(func=cmd_rates_sweep)

    p = sub.add_parser("gap-cert", help="capacity-gap certificate")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--gamma", type=float, help="log2(1+SNR); must be an integer")
    p.add_argument("--snr-db", help="alternative to --gamma")
    p.add_argument("--L", type=int)
    p.set_defaults(func=cmd_gap_cert)

    p = sub.add_parser("validate", help="check the exponential digit model")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--l1", type=int)
    p.add_argument("--l2", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--blocklength", type=int, default=1_000_000)
    p.add_argument("--ks-threshold", type=float,
                   help="default: 1.95/sqrt(N) plus the grid allowance")
    p.add_argument("--perturb", metavar="LEVEL:DELTA",
                   help="sample from a profile with p_LEVEL += DELTA (negative control)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="Monte Carlo bit-level channel")
    common(p)
    p.add_argument("--mode", choices=[m.value for m in SimMode], default="genie_strip")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--blocklength", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "trials", 1) < 1 or getattr(args, "blocklength", 1) < 1:
            raise UsageError("--trials and --blocklength must be positive")
        if getattr(args, "seed", 0) < 0 or getattr(args, "seed", 0) >= 2 ** 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        text, code = args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"expcode {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
