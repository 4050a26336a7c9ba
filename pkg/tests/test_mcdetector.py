import math

import pytest

from backcoop.mcdetector import (
    BerEstimate,
    DetectorScenario,
    SignalModel,
    compare_with_lemma,
    hypothesis_energies,
    integral_samples_per_bit,
    midpoint_threshold,
    simulate_ber,
)
from backcoop.model import ChannelGains, DomainError, SystemParams

# a link strong enough that detection is noise-limited at small N
CLEAN = ChannelGains(1e-2, 1e-9, 1.0, 1.0, 1e-3, 1e-3)


def test_integral_samples_per_bit():
    assert integral_samples_per_bit(SystemParams()) == 6
    with pytest.raises(DomainError):
        integral_samples_per_bit(SystemParams(s_rate=2.5e5))


def test_scenario_validation():
    with pytest.raises(DomainError):
        DetectorScenario(n_bits=0)
    assert DetectorScenario(direction="2->1", signal_model="unit_modulus_random_phase").signal_model \
        is SignalModel.UNIT_MODULUS


def test_hypotheses_and_midpoint(fig_gains, params):
    m0, m1 = hypothesis_energies("1->2", fig_gains, params)
    assert m1 > m0
    assert midpoint_threshold("1->2", fig_gains, params) == pytest.approx(0.5 * (m0 + m1))
    # the reflected term is mu^2 h_E1 h_12 P0 behind the splitter
    assert m1 - m0 == pytest.approx(0.3 * 0.64 * fig_gains.h_e1 * fig_gains.h_12, rel=1e-12)


def test_hypotheses_equal_without_reflection(fig_gains):
    m0, m1 = hypothesis_energies("1->2", fig_gains, SystemParams(mu1=0.0))
    assert m0 == m1


def test_deterministic_for_seed(fig_gains, params):
    s = DetectorScenario(n_bits=20_000, seed=5)
    assert simulate_ber(s, fig_gains, params) == simulate_ber(s, fig_gains, params)
    other = simulate_ber(DetectorScenario(n_bits=20_000, seed=6), fig_gains, params)
    assert other != simulate_ber(s, fig_gains, params)


def test_chunking_is_part_of_the_stream(fig_gains, params):
    s = DetectorScenario(n_bits=10_000, seed=1)
    assert simulate_ber(s, fig_gains, params, chunk_bits=4096) != simulate_ber(s, fig_gains, params)


def test_coin_flip_without_split(fig_gains):
    est = simulate_ber(DetectorScenario(n_bits=40_000, seed=3), fig_gains, SystemParams(beta=1.0))
    assert abs(est.p_hat - 0.5) < 4 * math.sqrt(0.25 / 40_000)


def test_interval_is_wald(fig_gains, params):
    est = simulate_ber(DetectorScenario(n_bits=10_000, seed=2), fig_gains, params)
    assert est.ci_halfwidth == pytest.approx(1.959963984540054 * math.sqrt(est.p_hat * (1 - est.p_hat) / 1e4))
    assert est.p_best <= est.p_hat


@pytest.mark.parametrize("model", list(SignalModel))
def test_more_samples_help_on_clean_link(model):
    p = [simulate_ber(DetectorScenario(n_bits=30_000, seed=9, signal_model=model), CLEAN,
                      SystemParams(s_rate=n * 1e5)).p_hat for n in (6, 24)]
    assert p[1] <= p[0]
    if model is SignalModel.GAUSSIAN:
        assert p[1] < p[0]


def test_compare_with_lemma_row(fig_gains, params):
    row = compare_with_lemma(DetectorScenario(n_bits=5000, seed=4), fig_gains, params, "x", 4.0)
    assert row.n == 6
    assert row.h_12 == fig_gains.h_12
    assert row.ratio == pytest.approx(row.mc_ber / row.lemma_ber)
    assert len(row.row()) == 11
