"""Max-min (common) throughput over the protocol's time allocation.

Both schemes are solved by bisection on the common rate ``z``.  For each
trial ``z`` the rate constraints of the exchange stage become lower bounds
on exchange time (backscatter) or energy (active exchange), and the trial is
feasible iff a concave slack maximized over the remaining budget is
nonnegative.  Grid oracles enumerate the same problems exhaustively.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .model import ChannelGains, DomainError, SystemParams, TimeAllocation, check
from .rates import (
    LN2,
    Direction,
    HarvestPolicy,
    RateBreakdown,
    benchmark_rates,
    ber_backscatter,
    bsc_capacity,
    harvest_rates,
    overall_rates,
)

GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)
ACTIVE_RTOL = 1e-6
# bisection also stops only once the bracket is this small relative to Z
Z_RTOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    z_tolerance: float = 1e-9
    inner_tolerance: float = 1e-12
    max_iterations: int = 200
    grid_resolution: float = 0.005
    energy_levels: int = 5

    def __post_init__(self):
        if not (self.z_tolerance > 0 and self.inner_tolerance > 0):
            raise DomainError("solver tolerances must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")
        _check_resolution(self.grid_resolution)
        if self.energy_levels < 1:
            raise DomainError("energy_levels must be at least 1")


@dataclass(frozen=True)
class Diagnostics:
    iterations: int = 0
    converged: bool = True
    active: tuple[str, ...] = ()
    message: str = ""
    z_lower: float = 0.0
    z_upper: float = 0.0


@dataclass(frozen=True)
class Solution:
    allocation: TimeAllocation
    common_throughput: float
    breakdown: RateBreakdown
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    exchange_energies: Optional[tuple[float, float]] = None


class SolverError(RuntimeError):
    """The bisection did not converge; ``solution`` holds the best certified point."""

    def __init__(self, message: str, solution: Solution):
        super().__init__(message)
        self.solution = solution


def _check_resolution(resolution):
    if not (0.0 < resolution <= 0.25):
        raise DomainError(f"grid resolution must lie in (0, 0.25], got {resolution!r}")


def _joint_rate(energy_snr, t3, params):
    """Joint-stage bits when ``energy_snr = E1*h_1A + E2*h_2A`` joules are spent over ``t3``."""
    if t3 <= 0.0:
        return 0.0
    return 0.5 * t3 * params.bandwidth * math.log1p(energy_snr / (params.sigma0_sq * t3)) / LN2


def _golden_max(f, a, b, tol):
    """Maximize a concave ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _best_joint(g0, g, room, params, tol):
    """Best joint-stage rate when ``room`` time is split between harvesting at
    SNR-weighted power ``g`` and the joint stage, on top of ``g0`` already banked."""
    if room <= 0.0:
        return 0.0, 0.0
    return _golden_max(lambda t3: _joint_rate(g0 + g * (room - t3), t3, params), 0.0, room, tol)


def active_constraints(b: RateBreakdown, z: float) -> tuple[str, ...]:
    """Labels of the rate constraints holding with equality at common rate ``z``."""
    scale = ACTIVE_RTOL * max(abs(z), 1e-300)
    named = (("exchange_1", b.r1_ex), ("exchange_2", b.r2_ex), ("joint_1", b.r3), ("joint_2", b.r3))
    return tuple(name for name, r in named if abs(r - z) <= scale)


def _bisect(feasible, z_upper, cfg):
    """Largest ``z`` in ``[0, z_upper]`` accepted by ``feasible``.

    ``feasible(z)`` returns a certificate or ``None``.  Returns
    ``(z_lo, z_hi, certificate, iterations, converged)``.
    """
    lo, hi = 0.0, z_upper
    cert = feasible(0.0)
    iterations = 0
    while hi - lo > min(cfg.z_tolerance, Z_RTOL * hi):
        if iterations >= cfg.max_iterations:
            return lo, hi, cert, iterations, False
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        iterations += 1
        found = feasible(mid)
        if found is not None:
            lo, cert = mid, found
        else:
            hi = mid
    return lo, hi, cert, iterations, True


# -- backscatter-assisted cooperation -----------------------------------------

def maximize_common_throughput(
    gains: ChannelGains,
    params: SystemParams,
    policy: HarvestPolicy = HarvestPolicy(),
    cfg: SolverConfig = SolverConfig(),
) -> Solution:
    """Optimal time allocation of the backscatter-assisted protocol.

    Raises :class:`SolverError` if bisection exhausts ``cfg.max_iterations``.
    """
    check(params, gains)
    budget = params.budget
    c2 = bsc_capacity(ber_backscatter(Direction.FORWARD, gains, params))
    c1 = bsc_capacity(ber_backscatter(Direction.REVERSE, gains, params))
    if c1 == 0.0 or c2 == 0.0:
        alloc = TimeAllocation.from_stages(params.t0, budget, 0.0, 0.0, 0.0)
        b = overall_rates(alloc, gains, params, policy)
        diag = Diagnostics(message=f"exchange impossible: backscatter capacity C1={c1!r}, C2={c2!r}")
        return Solution(alloc, 0.0, b, diag)

    hr = harvest_rates(gains, params, policy)
    g_wet = hr.wet1 * gains.h_1a + hr.wet2 * gains.h_2a
    g_slot1 = hr.own1 * gains.h_1a + hr.recv2 * gains.h_2a
    g_slot2 = hr.recv1 * gains.h_1a + hr.own2 * gains.h_2a
    g_best = max(g_wet, g_slot1, g_slot2)
    kx1, kx2 = params.rb * c2, params.rb * c1
    tol = cfg.inner_tolerance

    def feasible(z):
        low1, low2 = z / kx1, z / kx2
        room = budget - low1 - low2
        t3, r3 = _best_joint(g_slot1 * low1 + g_slot2 * low2, g_best, room, params, tol)
        if r3 - z < 0.0 or (z > 0.0 and room <= 0.0):
            return None
        return low1, low2, room, t3

    _, relaxed = _best_joint(0.0, g_best, budget, params, tol)
    z_upper = min(relaxed, budget / (1.0 / kx1 + 1.0 / kx2))
    z_lo, z_hi, cert, iterations, converged = _bisect(feasible, z_upper, cfg)

    low1, low2, room, t3 = cert
    spare = room - t3
    t1, t21, t22 = 0.0, low1, low2
    # leftover time goes wherever it harvests best; ties keep the WET stage
    if g_wet >= max(g_slot1, g_slot2):
        t1 = spare
    elif g_slot1 == g_slot2:
        t21 += 0.5 * spare
        t22 += 0.5 * spare
    elif g_slot1 > g_slot2:
        t21 += spare
    else:
        t22 += spare
    alloc = TimeAllocation.from_stages(params.t0, t1, t21, t22, t3)
    b = overall_rates(alloc, gains, params, policy)
    z = min(b.r1, b.r2)
    diag = Diagnostics(iterations, converged, active_constraints(b, z), "", z_lo, z_hi)
    sol = Solution(alloc, z, b, diag)
    if not converged:
        raise SolverError(f"bisection did not converge in {cfg.max_iterations} iterations", sol)
    return sol


# -- cooperation without backscatter (active exchange baseline) -------------

def maximize_benchmark(
    gains: ChannelGains,
    params: SystemParams,
    cfg: SolverConfig = SolverConfig(),
) -> Solution:
    """Optimal time and exchange-energy allocation of the no-backscatter baseline."""
    check(params, gains)
    budget = params.budget
    hr = harvest_rates(gains, params)
    wet1, wet2 = hr.wet1, hr.wet2
    g_wet = wet1 * gains.h_1a + wet2 * gains.h_2a
    k = kernels.backend

    def feasible(z):
        if z == 0.0:
            return 0.0, budget, 0.0, 0.0, 0.0
        slack, t1, t21, t22, t3 = k.benchmark_feasibility(
            z, budget, wet1, wet2, gains.h_1a, gains.h_2a, gains.h_12, gains.h_21,
            params.sigma0_sq, params.bandwidth, cfg.inner_tolerance,
        )
        if not slack >= 0.0:
            return None
        return z, t1, t21, t22, t3

    _, relaxed = _best_joint(0.0, g_wet, budget, params, cfg.inner_tolerance)
    link_cap = min(
        budget * params.bandwidth * math.log1p(wet1 * gains.h_12 / params.sigma0_sq) / LN2,
        budget * params.bandwidth * math.log1p(wet2 * gains.h_21 / params.sigma0_sq) / LN2,
    )
    z_upper = min(relaxed, link_cap)
    z_lo, z_hi, cert, iterations, converged = _bisect(feasible, z_upper, cfg)

    z, t1, t21, t22, t3 = cert
    alloc = TimeAllocation.from_stages(params.t0, t1, t21, t22, t3)
    e1 = min(_cheapest_energy(z, t21, gains.h_12, params), wet1 * t1)
    e2 = min(_cheapest_energy(z, t22, gains.h_21, params), wet2 * t1)
    b = benchmark_rates(alloc, e1, e2, gains, params)
    common = min(b.r1, b.r2)
    diag = Diagnostics(iterations, converged, active_constraints(b, common), "", z_lo, z_hi)
    sol = Solution(alloc, common, b, diag, exchange_energies=(e1, e2))
    if not converged:
        raise SolverError(f"bisection did not converge in {cfg.max_iterations} iterations", sol)
    return sol


def _cheapest_energy(z, t, gain, params):
    """Energy an active link of duration ``t`` needs to carry ``z`` bits."""
    if z == 0.0:
        return 0.0
    if t <= 0.0:
        return math.inf
    return t * params.sigma0_sq / gain * math.expm1(z * LN2 / (t * params.bandwidth))


# -- exhaustive grid oracles ---------------------------------------------------

def _grid(resolution, budget):
    """Grid denominator ``m`` (points are ``index / m``) and the largest index."""
    m = 1.0 / resolution
    if abs(m - round(m)) < 1e-9:
        m = float(round(m))
    return m, int(math.floor(budget * m + 1e-9))


def _grid_allocation(params, m, i, j, k):
    t1, t21, t22 = i / m, j / m, k / m
    t3 = max(params.budget - (t1 + t21 + t22), 0.0)
    return TimeAllocation.from_stages(params.t0, t1, t21, t22, t3)


def grid_oracle(
    gains: ChannelGains,
    params: SystemParams,
    policy: HarvestPolicy = HarvestPolicy(),
    resolution: float = 0.005,
    backend: Optional[str] = None,
) -> Solution:
    """Best grid point of the backscatter protocol, by exhaustive enumeration.

    ``t1, t21, t22`` range over multiples of ``resolution``; ``t3`` takes
    the remaining budget and is split evenly.  Ties go to the
    lexicographically smallest allocation.
    """
    check(params, gains)
    _check_resolution(resolution)
    m, nmax = _grid(resolution, params.budget)
    hr = harvest_rates(gains, params, policy)
    c2 = bsc_capacity(ber_backscatter(Direction.FORWARD, gains, params))
    c1 = bsc_capacity(ber_backscatter(Direction.REVERSE, gains, params))
    k = kernels.get_backend(backend)
    _, i, j, kk = k.grid_backscatter(
        params.budget, m, nmax, hr.wet1, hr.wet2, hr.own1, hr.own2, hr.recv1, hr.recv2,
        gains.h_1a, gains.h_2a, params.sigma0_sq, params.bandwidth,
        params.rb * c2, params.rb * c1,
    )
    alloc = _grid_allocation(params, m, i, j, kk)
    b = overall_rates(alloc, gains, params, policy)
    z = min(b.r1, b.r2)
    return Solution(alloc, z, b, Diagnostics(active=active_constraints(b, z), message="grid"))


def benchmark_grid_oracle(
    gains: ChannelGains,
    params: SystemParams,
    resolution: float = 0.02,
    energy_levels: int = 5,
    backend: Optional[str] = None,
) -> Solution:
    """Exhaustive search of the baseline over times and exchange-energy levels.

    Each device's exchange energy takes ``energy_levels`` evenly spaced
    values between zero and its WET harvest.
    """
    check(params, gains)
    _check_resolution(resolution)
    if energy_levels < 1:
        raise DomainError("energy_levels must be at least 1")
    m, nmax = _grid(resolution, params.budget)
    hr = harvest_rates(gains, params)
    k = kernels.get_backend(backend)
    _, i, j, kk, l1, l2 = k.grid_benchmark(
        params.budget, m, nmax, energy_levels, hr.wet1, hr.wet2,
        gains.h_1a, gains.h_2a, gains.h_12, gains.h_21, params.sigma0_sq, params.bandwidth,
    )
    alloc = _grid_allocation(params, m, i, j, kk)
    span = energy_levels - 1 if energy_levels > 1 else 1.0
    e1 = hr.wet1 * alloc.t1 * (l1 / span)
    e2 = hr.wet2 * alloc.t1 * (l2 / span)
    b = benchmark_rates(alloc, e1, e2, gains, params)
    z = min(b.r1, b.r2)
    return Solution(alloc, z, b, Diagnostics(active=active_constraints(b, z), message="grid"),
                    exchange_energies=(e1, e2))
