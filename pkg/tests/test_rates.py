import math

import pytest
from hypothesis import given, settings, strategies as st

from backcoop.model import ChannelGains, DomainError, SystemParams, TimeAllocation
from backcoop.rates import (
    Direction,
    EnergyLedger,
    HarvestPolicy,
    OwnSlotMode,
    active_link_rate,
    alamouti_rate,
    benchmark_rates,
    ber_backscatter,
    binary_entropy,
    bsc_capacity,
    exchange_rates,
    harvest_backscatter,
    harvest_wet,
    overall_rates,
    transmit_powers,
)

# closed-form BER and its erfc argument for h_E = 8.5e-5 and h_12 from the
# path-loss model at d_12 (mpmath, 40 digits)
BER_AT = {
    1.0: 1.231615338113094897e-126,
    2.0: 0.000011863964634148164131,
    4.0: 0.22748371141956212612,
}
H12_AT = {1.0: 0.00021991544785611194657, 2.0: 0.000038875926116683338022, 4.0: 6.8723577455034983303e-6}

gain = st.floats(1e-7, 1e-4)


def sym(h12):
    return ChannelGains(8.5e-5, 8.5e-5, 8.5e-6, 8.5e-6, h12, h12)


def test_wet_harvest(params):
    g = ChannelGains(8.5e-5, 4.25e-5, 1e-6, 1e-6, 1e-6, 1e-6)
    e1, e2 = harvest_wet(0.5, g, params)
    assert e1 == pytest.approx(3.4e-5, rel=1e-14)
    assert e2 == pytest.approx(1.7e-5, rel=1e-14)
    assert harvest_wet(0.0, g, params) == (0.0, 0.0)


def test_backscatter_harvest_term_by_term(params):
    # WD1 reflects for 0.1: own slot at 1 - mu^2/2; WD2 receives direct,
    # cross and reflected power behind the splitter (mpmath oracle)
    e1, e2 = harvest_backscatter(0.1, 0.0, sym(H12_AT[4.0]), params)
    assert e1 == pytest.approx(4.624e-6, rel=1e-13)
    assert e2 == pytest.approx(4.769993209333626942e-6, rel=1e-13)


def test_own_slot_modes(params):
    g = sym(H12_AT[4.0])
    none = harvest_backscatter(0.1, 0.0, g, params, HarvestPolicy(OwnSlotMode.NONE))
    full = harvest_backscatter(0.1, 0.0, g, params, HarvestPolicy(OwnSlotMode.FULL))
    assert none[0] == 0.0
    assert full[0] == pytest.approx(0.8 * 8.5e-5 * 0.1)
    assert none[1] == full[1]


def test_cross_term_only_adds(params):
    g = sym(H12_AT[2.0])
    with_x = harvest_backscatter(0.2, 0.3, g, params)
    without = harvest_backscatter(0.2, 0.3, g, params, HarvestPolicy(include_cross_term=False))
    assert with_x[0] > without[0] and with_x[1] > without[1]


@pytest.mark.parametrize("d", sorted(BER_AT))
def test_ber_matches_high_precision(d, params):
    got = ber_backscatter(Direction.FORWARD, sym(H12_AT[d]), params)
    assert got == pytest.approx(BER_AT[d], rel=1e-12)


def test_ber_directions_use_their_own_link(params):
    g = ChannelGains(8.5e-5, 8.5e-5, 1e-6, 1e-6, H12_AT[2.0], H12_AT[4.0])
    assert ber_backscatter(Direction.FORWARD, g, params) == pytest.approx(BER_AT[2.0], rel=1e-12)
    assert ber_backscatter(Direction.REVERSE, g, params) == pytest.approx(BER_AT[4.0], rel=1e-12)


def test_ber_no_split_is_coin_flip(fig_gains):
    assert ber_backscatter(Direction.FORWARD, fig_gains, SystemParams(beta=1.0)) == 0.5
    assert ber_backscatter(Direction.FORWARD, fig_gains, SystemParams(mu1=0.0)) == 0.5


@given(st.floats(1e-9, 1e-3), st.floats(1e-9, 1e-3))
def test_ber_decreases_with_link_gain(a, b):
    p = SystemParams()
    lo, hi = sorted((a, b))
    assert ber_backscatter("1->2", sym(hi), p) <= ber_backscatter("1->2", sym(lo), p)


def test_bsc_capacity_values():
    assert bsc_capacity(0.0) == 1.0
    assert bsc_capacity(0.5) == 0.0
    # 1 - H(0.11) (mpmath)
    assert bsc_capacity(0.11) == pytest.approx(0.50008404183547200436, rel=1e-13)
    assert bsc_capacity(BER_AT[4.0]) == pytest.approx(0.22640100867003341584, rel=1e-13)


@given(st.floats(0.0, 0.5))
def test_entropy_symmetric_and_bounded(p):
    h = binary_entropy(p)
    assert 0.0 <= h <= 1.0 + 1e-15
    assert h == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)


def test_bsc_rejects_out_of_range():
    with pytest.raises(DomainError):
        bsc_capacity(0.7)


def test_exchange_rates_cross_capacities(params):
    assert exchange_rates(0.2, 0.4, c1=0.5, c2=0.25, params=params) == (5000.0, 20000.0)


def test_transmit_powers():
    led = EnergyLedger(1e-5, 2e-5, 1e-6, 0.0)
    assert transmit_powers(led, 0.1) == pytest.approx((1.1e-4, 2e-4))
    assert transmit_powers(EnergyLedger(), 0.0) == (0.0, 0.0)
    with pytest.raises(DomainError):
        transmit_powers(led, 0.0)


def test_alamouti_rate(params):
    g = ChannelGains(1e-5, 1e-5, 8.5e-6, 8.5e-6, 1e-6, 1e-6)
    # 0.1 * W * log2(1 + 2 * 1e-3 * 8.5e-6 / 1e-10) (mpmath)
    assert alamouti_rate(0.2, 1e-3, 1e-3, g, params) == pytest.approx(74178.525148858978567, rel=1e-13)


def test_active_link_limits(params):
    assert active_link_rate(0.0, 1e-6, 1e-5, params) == 0.0
    assert active_link_rate(0.3, 0.0, 1e-5, params) == 0.0
    r = active_link_rate(0.3, 1e-6, 1e-5, params)
    assert r == pytest.approx(0.3 * 1e5 * math.log2(1 + 1e-6 * 1e-5 / (0.3 * 1e-10)))


@settings(max_examples=60)
@given(st.floats(1e-4, 1.0), st.floats(1e-4, 1.0), st.floats(0.0, 1.0))
def test_active_link_concave_in_time(t_a, t_b, lam):
    p = SystemParams()
    f = lambda t: active_link_rate(t, 1e-6, 1e-5, p)
    mid = lam * t_a + (1 - lam) * t_b
    assert f(mid) >= lam * f(t_a) + (1 - lam) * f(t_b) - 1e-9 * max(f(t_a), f(t_b), 1.0)


@settings(max_examples=60)
@given(st.floats(1e-4, 1.0), st.floats(1e-4, 1.0), st.floats(0.0, 1.0))
def test_alamouti_concave_in_joint_time(t_a, t_b, lam):
    # fixed energy spread over a longer joint stage
    p = SystemParams()
    g = ChannelGains(1e-5, 1e-5, 8.5e-6, 8.5e-6, 1e-6, 1e-6)
    f = lambda t: alamouti_rate(t, 1e-6 / t, 1e-6 / t, g, p)
    mid = lam * t_a + (1 - lam) * t_b
    assert f(mid) >= lam * f(t_a) + (1 - lam) * f(t_b) - 1e-9 * max(f(t_a), f(t_b), 1.0)


def test_overall_rates_consistent(fig_gains, params):
    t = TimeAllocation.from_stages(0.0, 0.2, 0.3, 0.3, 0.2)
    b = overall_rates(t, fig_gains, params)
    assert b.r1 == min(b.r1_ex, b.r3)
    assert b.r2 == min(b.r2_ex, b.r3)
    assert b.common == min(b.r1, b.r2)
    assert b.c1 == b.c2 == pytest.approx(0.22640100867003341584, rel=1e-12)
    assert b.r1_ex == pytest.approx(1e5 * 0.3 * b.c2)
    led = b.ledger
    assert b.p1 == pytest.approx((led.e1_wet + led.e1_bs) / 0.2)


def test_overall_rates_rejects_infeasible(fig_gains, params):
    with pytest.raises(DomainError):
        overall_rates(TimeAllocation(0.0, 0.5, 0.5, 0.5, 0.0, 0.0), fig_gains, params)


def test_ledger_zero_when_stage_empty(fig_gains, params):
    b = overall_rates(TimeAllocation.from_stages(0.0, 0.0, 0.5, 0.0, 0.5), fig_gains, params)
    assert b.ledger.e1_wet == b.ledger.e2_wet == 0.0
    assert b.r2_ex == 0.0


def test_benchmark_rates(fig_gains, params):
    t = TimeAllocation.from_stages(0.0, 0.5, 0.1, 0.1, 0.3)
    e_wet = 0.8 * 8.5e-5 * 0.5
    b = benchmark_rates(t, 0.25 * e_wet, 0.5 * e_wet, fig_gains, params)
    assert b.pe1 is None and b.c1 is None
    assert b.r1_ex == pytest.approx(active_link_rate(0.1, 0.25 * e_wet, fig_gains.h_12, params))
    assert b.p1 == pytest.approx(0.75 * e_wet / 0.3)
    assert b.p2 == pytest.approx(0.5 * e_wet / 0.3)


def test_benchmark_rates_no_exchange_energy(fig_gains, params):
    t = TimeAllocation.from_stages(0.0, 0.5, 0.1, 0.1, 0.3)
    b = benchmark_rates(t, 0.0, 0.0, fig_gains, params)
    assert b.r1 == b.r2 == 0.0


def test_benchmark_rates_energy_cap(fig_gains, params):
    t = TimeAllocation.from_stages(0.0, 0.5, 0.1, 0.1, 0.3)
    with pytest.raises(DomainError):
        benchmark_rates(t, 1.0, 0.0, fig_gains, params)


def test_benchmark_exchange_vanishes_out_of_range(params):
    t = TimeAllocation.from_stages(0.0, 0.5, 0.1, 0.1, 0.3)
    e = 0.8 * 8.5e-5 * 0.5 * 0.5
    rates = [benchmark_rates(t, e, e, sym(h), params).r1_ex for h in (1e-6, 1e-10, 1e-14, 1e-18)]
    assert rates == sorted(rates, reverse=True)
    assert rates[-1] < 1e-3
