"""Command line entry point: ``backcoop solve|sweep|ber``.

Exit codes: 0 success, 1 validation error, 2 solver non-convergence.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional, TextIO

from .config import Config, ConfigError, load_config
from .kernels import BACKEND
from .mcdetector import DetectorScenario, compare_with_lemma, write_ber_report
from .model import ChannelGains, DomainError, path_loss_gain
from .solver import Solution, SolverError, maximize_benchmark, maximize_common_throughput
from .sweep import FIG_H_A, FIG_H_E, FIG_SEPARATION, run_sweep, save_sweep, spec_from_config, write_sweep_csv

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2


def _solution_record(sol: Solution) -> dict:
    rec = asdict(sol)
    rec["allocation"]["t3"] = sol.allocation.t3
    return rec


def _print_solution(name: str, sol: Solution, out: TextIO) -> None:
    a, b, d = sol.allocation, sol.breakdown, sol.diagnostics
    led = b.ledger
    print(f"[{name}]", file=out)
    print(f"  common throughput  {sol.common_throughput:.6f} bits/block", file=out)
    print(f"  allocation         t0={a.t0:.6f} t1={a.t1:.6f} t21={a.t21:.6f} t22={a.t22:.6f} "
          f"t31={a.t31:.6f} t32={a.t32:.6f}", file=out)
    print(f"  rates              r1_ex={b.r1_ex:.6f} r2_ex={b.r2_ex:.6f} r3={b.r3:.6f} "
          f"r1={b.r1:.6f} r2={b.r2:.6f}", file=out)
    if b.pe1 is not None:
        print(f"  backscatter        pe1={b.pe1:.6e} pe2={b.pe2:.6e} c1={b.c1:.6f} c2={b.c2:.6f}", file=out)
    print(f"  powers             p1={b.p1:.6e} W p2={b.p2:.6e} W", file=out)
    print(f"  energy ledger      wet=({led.e1_wet:.6e}, {led.e2_wet:.6e}) J "
          f"backscatter=({led.e1_bs:.6e}, {led.e2_bs:.6e}) J "
          f"exchange=({led.e1_ex:.6e}, {led.e2_ex:.6e}) J", file=out)
    print(f"  active constraints {', '.join(d.active) or '-'}", file=out)
    print(f"  bisection          iterations={d.iterations} converged={d.converged} "
          f"bracket=[{d.z_lower!r}, {d.z_upper!r}]", file=out)
    if d.message:
        print(f"  note               {d.message}", file=out)


def run_instance(config_path, out_path=None, stream: Optional[TextIO] = None) -> dict[str, Solution]:
    """Solve both schemes for one configuration; raises on invalid input."""
    stream = stream or sys.stdout
    config = load_config(config_path)
    gains = config.resolve_gains()
    results = {}
    failure = None
    for name, solve in (
        ("backscatter", lambda: maximize_common_throughput(gains, config.params, config.policy, config.solver)),
        ("no_backscatter", lambda: maximize_benchmark(gains, config.params, config.solver)),
    ):
        try:
            results[name] = solve()
        except SolverError as exc:
            results[name] = exc.solution
            failure = failure or exc
        _print_solution(name, results[name], stream)
    if out_path is not None:
        record = {"config": config.as_dict(), "kernel_backend": BACKEND,
                  "solutions": {k: _solution_record(v) for k, v in results.items()}}
        Path(out_path).write_text(json.dumps(record, indent=2, sort_keys=True, default=str) + "\n")
    if failure is not None:
        raise failure
    return results


def ber_points(config: Config) -> list[tuple[str, Optional[float], ChannelGains]]:
    """``(label, d_12, gains)`` for every point listed in ``[ber]``."""
    if config.gains is not None or config.topology is not None:
        base = config.resolve_gains()
    else:
        h = path_loss_gain(FIG_SEPARATION, config.params)
        base = ChannelGains(FIG_H_E, FIG_H_E, FIG_H_A, FIG_H_A, h, h)
    points = []
    for d in config.ber.get("distances", []):
        h = path_loss_gain(float(d), config.params)
        points.append((f"d_12={float(d)!r}", float(d), base.replace(h_12=h, h_21=h)))
    for h in config.ber.get("h_12", []):
        points.append((f"h_12={float(h)!r}", None, base.replace(h_12=float(h), h_21=float(h))))
    return points


def run_ber_report(config_path, out: TextIO, seed: Optional[int] = None, n_bits: Optional[int] = None) -> int:
    """Write one closed-form vs Monte Carlo row per listed point; returns the row count.

    Every point reuses the same seed, so rows share random numbers.
    """
    config = load_config(config_path)
    table = config.ber
    scenario = DetectorScenario(
        direction=table.get("direction", "1->2"),
        n_bits=int(n_bits if n_bits is not None else table.get("n_bits", 100_000)),
        seed=int(seed if seed is not None else table.get("seed", 0)),
        signal_model=table.get("signal_model", "gaussian_energy_signal"),
    )
    rows = [compare_with_lemma(scenario, g, config.params, label, d) for label, d, g in ber_points(config)]
    comment = json.dumps({"config": config.as_dict(), "n_bits": scenario.n_bits,
                          "signal_model": scenario.signal_model.value}, sort_keys=True, default=str)
    write_ber_report(rows, out, comment)
    return len(rows)


def _cmd_solve(args) -> int:
    try:
        run_instance(args.config, args.out)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.spec) if args.spec else Config()
    spec = spec_from_config(config, args.preset, args.out)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.grid_check:
        overrides["grid_check"] = True
    if overrides:
        spec = replace(spec, **overrides)
    rows = run_sweep(spec, jobs=args.jobs)
    if spec.output_path:
        csv_path, dat_path = save_sweep(rows, spec, spec.output_path)
        print(f"wrote {csv_path} and {dat_path}")
    else:
        write_sweep_csv(rows, spec, sys.stdout)
    if any(r.status.startswith("nonconvergence") for r in rows):
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_ber(args) -> int:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            n = run_ber_report(args.config, fh, args.seed, args.n_bits)
        print(f"wrote {n} rows to {args.out}")
    else:
        run_ber_report(args.config, sys.stdout, args.seed, args.n_bits)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="backcoop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one configuration for both schemes")
    p.add_argument("config")
    p.add_argument("--out", help="write the solutions as JSON")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("spec", nargs="?", help="TOML file with a [sweep] section")
    p.add_argument("--preset", choices=["fig4", "fig5"])
    p.add_argument("--out", help="CSV path; a gnuplot .dat file is written alongside")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-check", action="store_true", help="also run the grid oracle and emit the gap")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("ber", help="closed-form vs Monte Carlo BER report")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-bits", type=int)
    p.set_defaults(func=_cmd_ber)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sweep" and not (args.spec or args.preset):
        print("error: sweep needs a spec file or --preset", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
