"""Parameter sweeps comparing backscatter cooperation with the active baseline."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence, TextIO

import numpy as np

from .config import Config, ConfigError
from .model import (
    ChannelGains,
    DomainError,
    SystemParams,
    TimeAllocation,
    Topology,
    gains_from_topology,
    path_loss_gain,
)
from .rates import benchmark_rates, overall_rates
from .solver import (
    Solution,
    SolverError,
    benchmark_grid_oracle,
    grid_oracle,
    maximize_benchmark,
    maximize_common_throughput,
)

SWEEP_VERSION = "backcoop-sweep v1"
SWEEP_COLUMNS = (
    "abscissa", "scheme", "rb", "common_throughput", "t0", "t1", "t21", "t22", "t3",
    "e_ex1", "e_ex2", "r1", "r2", "r3", "iterations", "converged", "active", "status", "gap",
)
KINDS = ("channel_disparity", "inter_user_distance", "custom")
BACKSCATTER, NO_BACKSCATTER = "backscatter", "no_backscatter"

FIG_H_E = 8.5e-5
FIG_H_A = 8.5e-6
FIG_SEPARATION = 4.0


@dataclass(frozen=True)
class Scheme:
    kind: str
    rb: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (BACKSCATTER, NO_BACKSCATTER):
            raise DomainError(f"unknown scheme {self.kind!r}")
        if self.kind == BACKSCATTER and self.rb is not None and not self.rb > 0:
            raise DomainError(f"backscatter rate must be positive, got {self.rb!r}")

    @property
    def label(self) -> str:
        if self.kind == BACKSCATTER and self.rb is not None:
            return f"{BACKSCATTER}_rb{self.rb:g}"
        return self.kind


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    values: tuple[float, ...]
    schemes: tuple[Scheme, ...]
    config: Config = field(default_factory=Config)
    parameter: Optional[str] = None
    output_path: Optional[str] = None
    seed: int = 0
    grid_check: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"sweep kind must be one of {KINDS}, got {self.kind!r}")
        if not self.values:
            raise DomainError("sweep needs at least one abscissa value")
        steps = np.diff(np.asarray(self.values, dtype=float))
        if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
            raise DomainError("sweep values must be strictly monotone")
        if not self.schemes:
            raise DomainError("sweep needs at least one scheme")
        if self.kind == "custom" and self.parameter is None:
            raise DomainError("custom sweeps must name the parameter they vary")


@dataclass(frozen=True)
class SweepRow:
    abscissa: float
    scheme: Scheme
    solution: Optional[Solution]
    status: str = "ok"
    gap: Optional[float] = None

    def cells(self) -> list[str]:
        rb = "" if self.scheme.rb is None else repr(float(self.scheme.rb))
        head = [repr(float(self.abscissa)), self.scheme.label, rb]
        s = self.solution
        if s is None:
            return head + [""] * (len(SWEEP_COLUMNS) - 5) + [self.status, ""]
        a, b = s.allocation, s.breakdown
        e1, e2 = s.exchange_energies if s.exchange_energies is not None else ("", "")
        return head + [
            repr(s.common_throughput), repr(a.t0), repr(a.t1), repr(a.t21), repr(a.t22), repr(a.t3),
            e1 if e1 == "" else repr(e1), e2 if e2 == "" else repr(e2),
            repr(b.r1), repr(b.r2), repr(b.r3),
            str(s.diagnostics.iterations), str(int(s.diagnostics.converged)),
            "|".join(s.diagnostics.active), self.status,
            "" if self.gap is None else repr(self.gap),
        ]


def fig4_preset(config: Optional[Config] = None) -> SweepSpec:
    """User-to-AP disparity: ``h_2A = h_1A / r`` for ``r = 1..10`` at 4 m separation."""
    config = config or Config()
    h_12 = path_loss_gain(FIG_SEPARATION, config.params)
    gains = ChannelGains(FIG_H_E, FIG_H_E, FIG_H_A, FIG_H_A, h_12, h_12)
    return SweepSpec(
        kind="channel_disparity",
        values=tuple(float(r) for r in range(1, 11)),
        schemes=(Scheme(BACKSCATTER, 5e4), Scheme(BACKSCATTER, 1e5), Scheme(NO_BACKSCATTER)),
        config=_with_gains(config, gains),
    )


def fig5_preset(config: Optional[Config] = None) -> SweepSpec:
    """Inter-user distance from 1 to 5 m in 0.5 m steps, equal user-to-AP gains."""
    config = config or Config()
    h_12 = path_loss_gain(FIG_SEPARATION, config.params)
    gains = ChannelGains(FIG_H_E, FIG_H_E, FIG_H_A, FIG_H_A, h_12, h_12)
    return SweepSpec(
        kind="inter_user_distance",
        values=tuple(1.0 + 0.5 * i for i in range(9)),
        schemes=(Scheme(BACKSCATTER, 5e4), Scheme(BACKSCATTER, 1e5), Scheme(NO_BACKSCATTER)),
        config=_with_gains(config, gains),
    )


PRESETS = {"fig4": fig4_preset, "fig5": fig5_preset}


def _with_gains(config: Config, gains: ChannelGains) -> Config:
    kw = {f.name: getattr(config, f.name) for f in fields(config)}
    kw.update(gains=gains, topology=None)
    return Config(**kw)


def spec_from_config(config: Config, preset: Optional[str] = None, output_path: Optional[str] = None) -> SweepSpec:
    """Build a sweep from a config's ``[sweep]`` table, optionally on top of a preset."""
    table = dict(config.sweep)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        base = PRESETS[preset](config)
        if config.gains is not None or config.topology is not None:
            # explicit gains in the file replace the preset's base gains
            base = SweepSpec(base.kind, base.values, base.schemes, config)
    else:
        if "kind" not in table:
            raise ConfigError("[sweep] needs a 'kind' (or pass a preset)")
        base = None

    try:
        kind = table.get("kind", base.kind if base else None)
        values = tuple(float(v) for v in table.get("values", base.values if base else ()))
        if "schemes" in table:
            schemes = tuple(Scheme(s["kind"], float(s["rb"]) if "rb" in s else None) for s in table["schemes"])
        else:
            schemes = base.schemes if base else (Scheme(BACKSCATTER, config.params.rb), Scheme(NO_BACKSCATTER))
        cfg = base.config if base else config
        return SweepSpec(
            kind=kind, values=values, schemes=schemes, config=cfg,
            parameter=table.get("parameter"),
            output_path=output_path or table.get("output"),
            seed=int(table.get("seed", 0)),
            grid_check=bool(table.get("grid_check", False)),
        )
    except (KeyError, TypeError, DomainError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[sweep] {exc}") from None


def point_instance(spec: SweepSpec, value: float, scheme: Scheme) -> tuple[SystemParams, ChannelGains]:
    """Parameters and gains of one sweep point under one scheme."""
    config = spec.config
    params = config.params
    if scheme.kind == BACKSCATTER and scheme.rb is not None:
        params = params.replace(rb=scheme.rb)

    if spec.kind == "custom" and spec.parameter in {f.name for f in fields(Topology)}:
        if config.gains is not None or config.topology is None:
            raise DomainError(f"sweeping {spec.parameter!r} needs a [topology] and no explicit [gains]")
        topo = Topology(**{**{f.name: getattr(config.topology, f.name) for f in fields(Topology)},
                           spec.parameter: value})
        return params, gains_from_topology(topo, params)

    gains = config.resolve_gains()
    if spec.kind == "channel_disparity":
        gains = gains.replace(h_2a=gains.h_1a / value)
    elif spec.kind == "inter_user_distance":
        h = path_loss_gain(value, params)
        gains = gains.replace(h_12=h, h_21=h)
    elif spec.parameter in {f.name for f in fields(SystemParams)}:
        params = params.replace(**{spec.parameter: value})
    elif spec.parameter in ("h_12", "h_21"):
        gains = gains.replace(h_12=value, h_21=value)
    elif spec.parameter in {f.name for f in fields(ChannelGains)}:
        gains = gains.replace(**{spec.parameter: value})
    else:
        raise DomainError(f"cannot sweep unknown parameter {spec.parameter!r}")
    return params, gains


def solve_point(spec: SweepSpec, value: float, scheme: Scheme) -> SweepRow:
    """Solve one (abscissa, scheme) cell; failures are recorded, not raised."""
    cfg, policy = spec.config.solver, spec.config.policy
    try:
        params, gains = point_instance(spec, value, scheme)
    except DomainError as exc:
        return SweepRow(value, scheme, None, f"invalid: {exc}")
    status = "ok"
    try:
        if scheme.kind == BACKSCATTER:
            sol = maximize_common_throughput(gains, params, policy, cfg)
        else:
            sol = maximize_benchmark(gains, params, cfg)
    except SolverError as exc:
        sol, status = exc.solution, f"nonconvergence: {exc}"
    except DomainError as exc:
        return SweepRow(value, scheme, None, f"invalid: {exc}")

    gap = None
    if spec.grid_check:
        if scheme.kind == BACKSCATTER:
            oracle = grid_oracle(gains, params, policy, cfg.grid_resolution)
        else:
            oracle = benchmark_grid_oracle(gains, params, cfg.grid_resolution, cfg.energy_levels)
        gap = sol.common_throughput - oracle.common_throughput
    return SweepRow(value, scheme, sol, status, gap)


def _solve_cell(args):
    return solve_point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Solve every (abscissa, scheme) cell; rows come back in abscissa order."""
    cells = [(spec, v, s) for v in spec.values for s in spec.schemes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_solve_cell, cells))
    return [_solve_cell(c) for c in cells]


def spec_header(spec: SweepSpec) -> str:
    resolved = spec.config.as_dict()
    resolved["sweep"] = {
        "kind": spec.kind, "values": list(spec.values), "parameter": spec.parameter,
        "schemes": [{"kind": s.kind, "rb": s.rb} for s in spec.schemes],
        "seed": spec.seed, "grid_check": spec.grid_check,
    }
    return json.dumps(resolved, sort_keys=True, default=str)


def write_sweep_csv(rows: Sequence[SweepRow], spec: SweepSpec, out: TextIO) -> None:
    out.write(f"# {SWEEP_VERSION}\n")
    out.write(f"# config: {spec_header(spec)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow(row.cells())


def write_gnuplot(rows: Sequence[SweepRow], spec: SweepSpec, out: TextIO) -> None:
    """One data block per scheme (select with gnuplot's ``index``)."""
    out.write(f"# {SWEEP_VERSION} gnuplot layout; columns: abscissa common_throughput\n")
    for n, scheme in enumerate(spec.schemes):
        if n:
            out.write("\n\n")
        out.write(f"# index {n}: {scheme.label}\n")
        for row in rows:
            if row.scheme == scheme:
                z = "nan" if row.solution is None else repr(row.solution.common_throughput)
                out.write(f"{row.abscissa!r} {z}\n")


def save_sweep(rows: Sequence[SweepRow], spec: SweepSpec, path) -> tuple[Path, Path]:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        write_sweep_csv(rows, spec, fh)
    dat = path.with_suffix(".dat")
    with dat.open("w") as fh:
        write_gnuplot(rows, spec, fh)
    return path, dat


def recompute_common(row: dict, spec: SweepSpec) -> float:
    """Common throughput re-evaluated from a CSV row's own allocation columns."""
    kind = BACKSCATTER if row["scheme"].startswith(BACKSCATTER) else NO_BACKSCATTER
    scheme = Scheme(kind, float(row["rb"]) if row["rb"] else None)
    params, gains = point_instance(spec, float(row["abscissa"]), scheme)
    alloc = TimeAllocation.from_stages(*(float(row[k]) for k in ("t0", "t1", "t21", "t22", "t3")))
    if scheme.kind == BACKSCATTER:
        b = overall_rates(alloc, gains, params, spec.config.policy)
    else:
        b = benchmark_rates(alloc, float(row["e_ex1"]), float(row["e_ex2"]), gains, params)
    return min(b.r1, b.r2)


def random_instances(n: int, seed: int, low: float = 1e-7, high: float = 1e-4) -> list[ChannelGains]:
    """Reciprocal channel gains drawn log-uniformly from ``[low, high]``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        h = np.exp(rng.uniform(math.log(low), math.log(high), 5))
        out.append(ChannelGains(*(float(x) for x in h[:4]), float(h[4]), float(h[4])))
    return out
