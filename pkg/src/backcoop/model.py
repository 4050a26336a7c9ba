"""Domain types for the two-user backscatter-cooperation network.

Power gains ``h_ij`` are the canonical channel state.  Amplitude
coefficients, where a formula needs them, are taken as ``sqrt(h_ij)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

SPEED_OF_LIGHT = 3e8
FEASIBILITY_TOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of a model operation."""


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the network.

    Defaults reproduce the simulation setup: 1 W energy node, 915 MHz
    carrier, path-loss exponent 2.5, 100 kbit/s backscatter at 600 kS/s.
    """

    p0: float = 1.0
    eta: float = 0.8
    beta: float = 0.7
    mu1: float = 0.8
    mu2: float = 0.8
    sigma0_sq: float = 1e-10
    sigmas_sq: float = 1e-10
    rb: float = 1e5
    s_rate: float = 6e5
    t0: float = 0.0
    bandwidth: float = 1e5
    ga: float = 2.0
    fd: float = 915e6
    lambda_pl: float = 2.5

    @property
    def samples_per_bit(self) -> float:
        return self.s_rate / self.rb

    @property
    def budget(self) -> float:
        """Time left for the three protocol stages once CE is paid."""
        return 1.0 - self.t0

    def replace(self, **changes) -> "SystemParams":
        return _replace(self, changes)


@dataclass(frozen=True)
class ChannelGains:
    h_e1: float
    h_e2: float
    h_1a: float
    h_2a: float
    h_12: float
    h_21: float

    def replace(self, **changes) -> "ChannelGains":
        return _replace(self, changes)

    @classmethod
    def symmetric(cls, h_e: float, h_a: float, h_12: float) -> "ChannelGains":
        return cls(h_e, h_e, h_a, h_a, h_12, h_12)


@dataclass(frozen=True)
class Topology:
    """Link distances in meters."""

    d_e1: float
    d_e2: float
    d_1a: float
    d_2a: float
    d_12: float


@dataclass(frozen=True)
class TimeAllocation:
    """Fractions of the unit block: ``[t0, t1, t21, t22, t31, t32]``."""

    t0: float
    t1: float
    t21: float
    t22: float
    t31: float
    t32: float

    @property
    def t2(self) -> float:
        return self.t21 + self.t22

    @property
    def t3(self) -> float:
        return self.t31 + self.t32

    def as_tuple(self) -> tuple[float, ...]:
        return (self.t0, self.t1, self.t21, self.t22, self.t31, self.t32)

    @classmethod
    def from_stages(cls, t0: float, t1: float, t21: float, t22: float, t3: float) -> "TimeAllocation":
        """Build an allocation with the joint stage split evenly between users."""
        return cls(t0, t1, t21, t22, 0.5 * t3, 0.5 * t3)

    def violations(self, tol: float = FEASIBILITY_TOL) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0.0:
                out.append(f"{f.name} = {v!r} is negative or not finite")
        total = math.fsum(self.as_tuple())
        if abs(total - 1.0) > tol:
            out.append(f"time budget: components sum to {total!r}, expected 1")
        return out

    def is_feasible(self, tol: float = FEASIBILITY_TOL) -> bool:
        return not self.violations(tol)


def _replace(obj, changes):
    kw = {f.name: getattr(obj, f.name) for f in fields(obj)}
    unknown = set(changes) - set(kw)
    if unknown:
        raise TypeError(f"unknown field(s) for {type(obj).__name__}: {sorted(unknown)}")
    kw.update(changes)
    return type(obj)(**kw)


def path_loss_gain(d: float, params: SystemParams) -> float:
    """Power gain ``G_A * (c / (4 pi d f_d)) ** lambda`` at distance ``d`` meters."""
    if not d > 0.0 or not math.isfinite(d):
        raise DomainError(f"distance must be positive and finite, got {d!r}")
    return params.ga * (SPEED_OF_LIGHT / (4.0 * math.pi * d * params.fd)) ** params.lambda_pl


def gains_from_topology(topo: Topology, params: SystemParams) -> ChannelGains:
    h_12 = path_loss_gain(topo.d_12, params)
    return ChannelGains(
        h_e1=path_loss_gain(topo.d_e1, params),
        h_e2=path_loss_gain(topo.d_e2, params),
        h_1a=path_loss_gain(topo.d_1a, params),
        h_2a=path_loss_gain(topo.d_2a, params),
        h_12=h_12,
        h_21=h_12,
    )


def _positive(name, value, report):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0.0):
        report.append(f"{name} must be positive and finite, got {value!r}")


def _unit(name, value, report, *, open_interval=False):
    ok = isinstance(value, (int, float)) and math.isfinite(value)
    if ok:
        ok = 0.0 < value < 1.0 if open_interval else 0.0 <= value <= 1.0
    if not ok:
        rng = "(0, 1)" if open_interval else "[0, 1]"
        report.append(f"{name} must lie in {rng}, got {value!r}")


def validate(params: SystemParams | None = None, gains: ChannelGains | None = None) -> list[str]:
    """Return a list of every violated invariant; empty means valid."""
    report: list[str] = []
    if params is not None:
        for name in ("p0", "sigma0_sq", "sigmas_sq", "rb", "s_rate", "bandwidth", "ga", "fd"):
            _positive(name, getattr(params, name), report)
        if not (math.isfinite(params.lambda_pl) and params.lambda_pl >= 0.0):
            report.append(f"lambda_pl must be nonnegative, got {params.lambda_pl!r}")
        _unit("eta", params.eta, report, open_interval=True)
        for name in ("beta", "mu1", "mu2"):
            _unit(name, getattr(params, name), report)
        if not (math.isfinite(params.t0) and 0.0 <= params.t0 < 1.0):
            report.append(f"t0 must lie in [0, 1), got {params.t0!r}")
        if params.rb > 0 and params.s_rate > 0 and params.samples_per_bit < 1.0:
            report.append(
                f"samples per bit s_rate/rb = {params.samples_per_bit!r} must be >= 1"
            )
    if gains is not None:
        for f in fields(gains):
            _positive(f.name, getattr(gains, f.name), report)
        if gains.h_12 != gains.h_21:
            report.append(f"reciprocity violated: h_12 = {gains.h_12!r} != h_21 = {gains.h_21!r}")
    return report


def check(params: SystemParams | None = None, gains: ChannelGains | None = None) -> None:
    """Raise :class:`DomainError` listing all violations, if any."""
    problems = validate(params, gains)
    if problems:
        raise DomainError("; ".join(problems))
