"""Closed-form energies, backscatter error rates and per-stage throughputs.

All rates are in bits per unit block: backscatter rates are ``R_b`` times
a time fraction, active-link rates carry the bandwidth ``W`` in front of
the spectral efficiency so both arms of the overall ``min`` share units.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from scipy.special import erfc

from .model import ChannelGains, DomainError, SystemParams, TimeAllocation

LN2 = math.log(2.0)


class Direction(str, enum.Enum):
    """Backscatter link direction, ``sender->receiver``."""

    FORWARD = "1->2"
    REVERSE = "2->1"


class OwnSlotMode(str, enum.Enum):
    NONE = "none"
    FULL = "full"
    BIT_AVERAGED = "bit_averaged"


@dataclass(frozen=True)
class HarvestPolicy:
    """How energy is credited during the backscatter stage.

    ``own_slot_mode`` covers the device that is backscattering its own bits;
    ``include_cross_term`` keeps the direct/reflected cross product in the
    receiving device's harvested power.
    """

    own_slot_mode: OwnSlotMode = OwnSlotMode.BIT_AVERAGED
    include_cross_term: bool = True

    def __post_init__(self):
        object.__setattr__(self, "own_slot_mode", OwnSlotMode(self.own_slot_mode))
        if not isinstance(self.include_cross_term, bool):
            raise DomainError("include_cross_term must be a bool")


@dataclass(frozen=True)
class EnergyLedger:
    """Joules per device and stage.

    ``e*_ex`` is energy spent on active information exchange; it is only
    nonzero for the no-backscatter baseline.
    """

    e1_wet: float = 0.0
    e2_wet: float = 0.0
    e1_bs: float = 0.0
    e2_bs: float = 0.0
    e1_ex: float = 0.0
    e2_ex: float = 0.0

    @property
    def e1_available(self) -> float:
        return max(self.e1_wet + self.e1_bs - self.e1_ex, 0.0)

    @property
    def e2_available(self) -> float:
        return max(self.e2_wet + self.e2_bs - self.e2_ex, 0.0)


@dataclass(frozen=True)
class RateBreakdown:
    r1_ex: float
    r2_ex: float
    r3: float
    r1: float
    r2: float
    p1: float
    p2: float
    ledger: EnergyLedger
    # error rates and capacities are undefined for the active-exchange baseline
    pe1: Optional[float] = None
    pe2: Optional[float] = None
    c1: Optional[float] = None
    c2: Optional[float] = None

    @property
    def common(self) -> float:
        return min(self.r1, self.r2)


class HarvestRates(NamedTuple):
    """Harvested power per unit stage time, watts.

    ``wet*`` applies during the energy-transfer stage, ``own*`` while a device
    backscatters its own bits, ``recv*`` while it receives the other's bits.
    """

    wet1: float
    wet2: float
    own1: float
    own2: float
    recv1: float
    recv2: float


def harvest_rates(gains: ChannelGains, params: SystemParams, policy: HarvestPolicy = HarvestPolicy()) -> HarvestRates:
    p0, eta, beta = params.p0, params.eta, params.beta
    mu1, mu2 = params.mu1, params.mu2
    wet1 = p0 * eta * gains.h_e1
    wet2 = p0 * eta * gains.h_e2

    cross = math.sqrt(gains.h_e1 * gains.h_e2)
    # WD2 listens while WD1 reflects, and vice versa
    recv2 = gains.h_e2 + 0.5 * mu1 * mu1 * gains.h_e1 * gains.h_12
    recv1 = gains.h_e1 + 0.5 * mu2 * mu2 * gains.h_e2 * gains.h_21
    if policy.include_cross_term:
        recv2 += mu1 * cross * math.sqrt(gains.h_12)
        recv1 += mu2 * cross * math.sqrt(gains.h_21)
    recv1 *= eta * beta * p0
    recv2 *= eta * beta * p0

    mode = policy.own_slot_mode
    if mode is OwnSlotMode.NONE:
        own1 = own2 = 0.0
    elif mode is OwnSlotMode.FULL:
        own1, own2 = wet1, wet2
    else:
        own1 = wet1 * (1.0 - 0.5 * mu1 * mu1)
        own2 = wet2 * (1.0 - 0.5 * mu2 * mu2)
    return HarvestRates(wet1, wet2, own1, own2, recv1, recv2)


def _nonneg(name, value):
    if not (value >= 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be nonnegative and finite, got {value!r}")


def harvest_wet(t1: float, gains: ChannelGains, params: SystemParams) -> tuple[float, float]:
    """Energy harvested by each device during a WET stage of length ``t1``."""
    _nonneg("t1", t1)
    return params.p0 * params.eta * gains.h_e1 * t1, params.p0 * params.eta * gains.h_e2 * t1


def harvest_backscatter(
    t21: float,
    t22: float,
    gains: ChannelGains,
    params: SystemParams,
    policy: HarvestPolicy = HarvestPolicy(),
) -> tuple[float, float]:
    """Energy harvested by each device over both backscatter slots."""
    _nonneg("t21", t21)
    _nonneg("t22", t22)
    hr = harvest_rates(gains, params, policy)
    return hr.own1 * t21 + hr.recv1 * t22, hr.recv2 * t21 + hr.own2 * t22


def detector_snr(direction: Direction, gains: ChannelGains, params: SystemParams) -> float:
    """Argument of the complementary error function in the energy-detector BER."""
    direction = Direction(direction)
    if direction is Direction.FORWARD:
        signal = params.mu1 ** 2 * gains.h_e1 * gains.h_12
    else:
        signal = params.mu2 ** 2 * gains.h_e2 * gains.h_21
    split = 1.0 - params.beta
    scale = split * params.p0 * math.sqrt(params.samples_per_bit)
    scale /= 4.0 * split * params.sigma0_sq + 4.0 * params.sigmas_sq
    return scale * signal


def ber_backscatter(direction: Direction, gains: ChannelGains, params: SystemParams) -> float:
    """Bit error rate at the receiving device of a backscatter link.

    ``Direction.FORWARD`` gives the error rate at WD2 (WD1 reflecting),
    ``Direction.REVERSE`` the error rate at WD1.
    """
    if params.samples_per_bit < 1.0:
        raise DomainError(f"need at least one sample per bit, got {params.samples_per_bit!r}")
    pe = 0.5 * float(erfc(detector_snr(direction, gains, params)))
    return min(max(pe, 0.0), 0.5)


def binary_entropy(p: float) -> float:
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log1p(-p) / LN2)


def bsc_capacity(pe: float) -> float:
    """Capacity of a binary symmetric channel with crossover ``pe``, bits/use."""
    if not (0.0 <= pe <= 0.5):
        raise DomainError(f"crossover probability must lie in [0, 0.5], got {pe!r}")
    return max(1.0 - binary_entropy(pe), 0.0)


def exchange_rates(t21: float, t22: float, c1: float, c2: float, params: SystemParams) -> tuple[float, float]:
    """Bits each device delivers to its partner by backscatter.

    WD1's message is decoded at WD2, so its rate uses ``c2``; mirrored for WD2.
    """
    return params.rb * t21 * c2, params.rb * t22 * c1


def transmit_powers(ledger: EnergyLedger, t3: float) -> tuple[float, float]:
    e1, e2 = ledger.e1_available, ledger.e2_available
    if t3 == 0.0:
        if e1 > 0.0 or e2 > 0.0:
            raise DomainError("joint stage has zero length but devices hold energy")
        return 0.0, 0.0
    _nonneg("t3", t3)
    return e1 / t3, e2 / t3


def alamouti_rate(t3: float, p1: float, p2: float, gains: ChannelGains, params: SystemParams) -> float:
    """Bits per block of the joint space-time coded transmission to the AP."""
    snr = (p1 * gains.h_1a + p2 * gains.h_2a) / params.sigma0_sq
    return 0.5 * t3 * params.bandwidth * math.log1p(snr) / LN2


def active_link_rate(t: float, energy: float, gain: float, params: SystemParams) -> float:
    """Bits sent over an active link of duration ``t`` using ``energy`` joules.

    The ``t -> 0`` limit of ``t log(1 + a/t)`` is zero.
    """
    if t == 0.0:
        return 0.0
    return t * params.bandwidth * math.log1p(energy * gain / (t * params.sigma0_sq)) / LN2


def _check_allocation(t: TimeAllocation):
    problems = t.violations()
    if problems:
        raise DomainError("infeasible time allocation: " + "; ".join(problems))


def _joint_stage(t3, ledger, gains, params):
    if t3 == 0.0:
        return 0.0, 0.0, 0.0
    p1, p2 = transmit_powers(ledger, t3)
    return p1, p2, alamouti_rate(t3, p1, p2, gains, params)


def overall_rates(
    t: TimeAllocation,
    gains: ChannelGains,
    params: SystemParams,
    policy: HarvestPolicy = HarvestPolicy(),
) -> RateBreakdown:
    """Evaluate every stage of the backscatter-assisted protocol at ``t``."""
    _check_allocation(t)
    e1_wet, e2_wet = harvest_wet(t.t1, gains, params)
    e1_bs, e2_bs = harvest_backscatter(t.t21, t.t22, gains, params, policy)
    ledger = EnergyLedger(e1_wet, e2_wet, e1_bs, e2_bs)

    pe2 = ber_backscatter(Direction.FORWARD, gains, params)
    pe1 = ber_backscatter(Direction.REVERSE, gains, params)
    c1, c2 = bsc_capacity(pe1), bsc_capacity(pe2)
    r1_ex, r2_ex = exchange_rates(t.t21, t.t22, c1, c2, params)

    p1, p2, r3 = _joint_stage(t.t3, ledger, gains, params)
    return RateBreakdown(
        r1_ex=r1_ex, r2_ex=r2_ex, r3=r3,
        r1=min(r1_ex, r3), r2=min(r2_ex, r3),
        p1=p1, p2=p2, ledger=ledger,
        pe1=pe1, pe2=pe2, c1=c1, c2=c2,
    )


def benchmark_rates(
    t: TimeAllocation,
    e_ex1: float,
    e_ex2: float,
    gains: ChannelGains,
    params: SystemParams,
) -> RateBreakdown:
    """Rates of cooperation without backscatter.

    The devices exchange messages actively, paying ``e_ex1``/``e_ex2`` out of
    their WET harvest and harvesting nothing meanwhile; the residual energy
    powers the joint transmission.
    """
    _check_allocation(t)
    e1_wet, e2_wet = harvest_wet(t.t1, gains, params)
    for name, spent, have in (("e_ex1", e_ex1, e1_wet), ("e_ex2", e_ex2, e2_wet)):
        _nonneg(name, spent)
        if spent > have * (1.0 + 1e-12):
            raise DomainError(f"{name} = {spent!r} J exceeds the {have!r} J harvested")
    e_ex1, e_ex2 = min(e_ex1, e1_wet), min(e_ex2, e2_wet)
    ledger = EnergyLedger(e1_wet, e2_wet, 0.0, 0.0, e_ex1, e_ex2)

    r1_ex = active_link_rate(t.t21, e_ex1, gains.h_12, params)
    r2_ex = active_link_rate(t.t22, e_ex2, gains.h_21, params)
    p1, p2, r3 = _joint_stage(t.t3, ledger, gains, params)
    return RateBreakdown(
        r1_ex=r1_ex, r2_ex=r2_ex, r3=r3,
        r1=min(r1_ex, r3), r2=min(r2_ex, r3),
        p1=p1, p2=p2, ledger=ledger,
    )
