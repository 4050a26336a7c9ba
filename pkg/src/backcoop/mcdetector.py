"""Sample-level Monte Carlo of the power-splitting backscatter receiver.

The receiver sees the energy node's signal directly and, while the partner
reflects a ``1``, a second copy through the partner with a random phase
held for the whole bit.  A fraction ``1 - beta`` of the antenna signal
(plus antenna noise) reaches the energy detector, which adds its own
circuit noise, averages ``|y|**2`` over the bit's samples and compares the
result to a threshold.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

import numpy as np

from .model import ChannelGains, DomainError, SystemParams, check
from .rates import Direction, ber_backscatter

CHUNK_BITS = 8192
Z95 = 1.959963984540054
REPORT_VERSION = "backcoop-ber v1"
REPORT_COLUMNS = (
    "direction", "point", "d_12", "h_12", "n", "lemma_ber", "mc_ber", "ci",
    "ratio", "best_threshold_ber", "seed",
)


class SignalModel(str, enum.Enum):
    GAUSSIAN = "gaussian_energy_signal"
    UNIT_MODULUS = "unit_modulus_random_phase"


@dataclass(frozen=True)
class DetectorScenario:
    direction: Direction = Direction.FORWARD
    n_bits: int = 100_000
    seed: int = 0
    signal_model: SignalModel = SignalModel.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "signal_model", SignalModel(self.signal_model))
        if self.n_bits < 1:
            raise DomainError(f"n_bits must be at least 1, got {self.n_bits!r}")


@dataclass(frozen=True)
class BerEstimate:
    """Empirical bit error rate with a 95% normal-approximation interval.

    ``best_threshold``/``p_best`` are the in-sample optimal threshold and its
    error rate, reported for comparison with the midpoint rule.
    """

    p_hat: float
    ci_halfwidth: float
    n_bits: int
    threshold: float
    best_threshold: float
    p_best: float


@dataclass(frozen=True)
class BerComparison:
    direction: Direction
    point: str
    d_12: Optional[float]
    h_12: float
    n: int
    lemma_ber: float
    mc_ber: float
    ci: float
    ratio: float
    best_threshold_ber: float
    seed: int

    def row(self) -> list[str]:
        d = "" if self.d_12 is None else repr(self.d_12)
        return [
            self.direction.value, self.point, d, repr(self.h_12), str(self.n),
            repr(self.lemma_ber), repr(self.mc_ber), repr(self.ci), repr(self.ratio),
            repr(self.best_threshold_ber), str(self.seed),
        ]


def integral_samples_per_bit(params: SystemParams) -> int:
    n = params.samples_per_bit
    if n < 1.0 or abs(n - round(n)) > 1e-9 * n:
        raise DomainError(f"samples per bit s_rate/rb = {n!r} must be a whole number >= 1")
    return int(round(n))


def _link(direction, gains, params):
    """``(direct gain, source gain, inter-user gain, reflection coefficient)``."""
    if Direction(direction) is Direction.FORWARD:
        return gains.h_e2, gains.h_e1, gains.h_12, params.mu1
    return gains.h_e1, gains.h_e2, gains.h_21, params.mu2


def hypothesis_energies(direction: Direction, gains: ChannelGains, params: SystemParams) -> tuple[float, float]:
    """Mean detector energy per sample given bit 0 and given bit 1.

    The cross term between direct and reflected paths averages out over the
    uniform reflection phase.
    """
    h_d, h_s, h_l, mu = _link(direction, gains, params)
    split = 1.0 - params.beta
    m0 = split * (params.p0 * h_d + params.sigma0_sq) + params.sigmas_sq
    m1 = split * (params.p0 * (h_d + mu * mu * h_s * h_l) + params.sigma0_sq) + params.sigmas_sq
    return m0, m1


def midpoint_threshold(direction: Direction, gains: ChannelGains, params: SystemParams) -> float:
    m0, m1 = hypothesis_energies(direction, gains, params)
    return 0.5 * (m0 + m1)


def _cn(rng, shape, power):
    """Circular complex Gaussian samples of the given average power."""
    scale = math.sqrt(0.5 * power)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _chunk_energies(rng, nb, n, direction, gains, params, signal_model):
    h_d, h_s, h_l, mu = _link(direction, gains, params)
    bits = rng.integers(0, 2, nb)
    phase = rng.uniform(0.0, 2.0 * math.pi, nb)
    if signal_model is SignalModel.GAUSSIAN:
        x = _cn(rng, (nb, n), 1.0)
    else:
        x = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, (nb, n)))
    n0 = _cn(rng, (nb, n), params.sigma0_sq)
    ns = _cn(rng, (nb, n), params.sigmas_sq)

    reflected = mu * math.sqrt(h_s * h_l) * np.exp(1j * phase) * bits
    amp = math.sqrt(params.p0) * (math.sqrt(h_d) + reflected)
    y = math.sqrt(1.0 - params.beta) * (amp[:, None] * x + n0) + ns
    energy = np.mean(y.real ** 2 + y.imag ** 2, axis=1)
    return bits, energy


def _best_threshold(bits, energy):
    """In-sample threshold minimizing errors of the rule ``energy > threshold -> 1``."""
    order = np.argsort(energy, kind="stable")
    e, b = energy[order], bits[order]
    # cutting after position k declares the first k+1 samples zero
    ones_below = np.concatenate(([0], np.cumsum(b)))
    zeros_above = (len(b) - np.sum(b)) - np.concatenate(([0], np.cumsum(1 - b)))
    errors = ones_below + zeros_above
    k = int(np.argmin(errors))
    if k == 0:
        thr = e[0] - abs(e[0]) * 1e-12
    elif k == len(e):
        thr = e[-1]
    else:
        thr = 0.5 * (e[k - 1] + e[k])
    return float(thr), int(errors[k])


def simulate_ber(
    scenario: DetectorScenario,
    gains: ChannelGains,
    params: SystemParams,
    chunk_bits: int = CHUNK_BITS,
) -> BerEstimate:
    """Estimate the energy detector's BER with the midpoint threshold.

    Bits are simulated in chunks; chunk ``c`` draws from its own stream
    seeded by ``(seed, c)``, so results depend only on the scenario and
    ``chunk_bits``.
    """
    check(params, gains)
    n = integral_samples_per_bit(params)
    threshold = midpoint_threshold(scenario.direction, gains, params)

    all_bits, all_energy = [], []
    errors = 0
    done, c = 0, 0
    while done < scenario.n_bits:
        nb = min(chunk_bits, scenario.n_bits - done)
        rng = np.random.default_rng(np.random.SeedSequence(scenario.seed, spawn_key=(c,)))
        bits, energy = _chunk_energies(rng, nb, n, scenario.direction, gains, params, scenario.signal_model)
        errors += int(np.count_nonzero((energy > threshold) != (bits == 1)))
        all_bits.append(bits)
        all_energy.append(energy)
        done += nb
        c += 1

    p_hat = errors / scenario.n_bits
    ci = Z95 * math.sqrt(p_hat * (1.0 - p_hat) / scenario.n_bits)
    best_thr, best_err = _best_threshold(np.concatenate(all_bits), np.concatenate(all_energy))
    return BerEstimate(p_hat, ci, scenario.n_bits, threshold, best_thr, best_err / scenario.n_bits)


def compare_with_lemma(
    scenario: DetectorScenario,
    gains: ChannelGains,
    params: SystemParams,
    point: str = "",
    d_12: Optional[float] = None,
) -> BerComparison:
    """Closed-form and simulated BER side by side; no pass/fail judgment."""
    lemma = ber_backscatter(scenario.direction, gains, params)
    est = simulate_ber(scenario, gains, params)
    if lemma > 0.0:
        ratio = est.p_hat / lemma
    else:
        ratio = 1.0 if est.p_hat == 0.0 else math.inf
    h_link = gains.h_12 if scenario.direction is Direction.FORWARD else gains.h_21
    return BerComparison(
        scenario.direction, point, d_12, h_link, integral_samples_per_bit(params),
        lemma, est.p_hat, est.ci_halfwidth, ratio, est.p_best, scenario.seed,
    )


def write_ber_report(rows: Iterable[BerComparison], out: TextIO, comment: str = "") -> None:
    out.write(f"# {REPORT_VERSION}\n")
    if comment:
        out.write(f"# {comment}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow(r.row())
