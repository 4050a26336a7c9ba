import math

import pytest

from backcoop.model import ChannelGains, DomainError, SystemParams, path_loss_gain
from backcoop.rates import HarvestPolicy, OwnSlotMode, overall_rates
from backcoop.solver import (
    SolverConfig,
    SolverError,
    benchmark_grid_oracle,
    grid_oracle,
    maximize_benchmark,
    maximize_common_throughput,
)
from backcoop.sweep import random_instances
from refine import refine_benchmark_from, refine_from

INSTANCES = random_instances(8, seed=11)


def assert_valid(sol):
    assert sol.allocation.violations(1e-12) == []
    assert sol.allocation.t31 == sol.allocation.t32
    b = sol.breakdown
    assert abs(sol.common_throughput - min(b.r1, b.r2)) <= 1e-9 * max(1.0, sol.common_throughput)


@pytest.mark.parametrize("g", INSTANCES)
def test_solution_invariants(g, params):
    assert_valid(maximize_common_throughput(g, params))
    assert_valid(maximize_benchmark(g, params))


@pytest.mark.parametrize("g", INSTANCES)
def test_solver_dominates_grid(g, params, policy):
    sol = maximize_common_throughput(g, params, policy)
    for res in (0.05, 0.02):
        assert sol.common_throughput >= grid_oracle(g, params, policy, res).common_throughput - 1e-9


def test_fig4_ratio_one_matches_grid(fig_gains, params, policy):
    sol = maximize_common_throughput(fig_gains, params, policy)
    oracle = grid_oracle(fig_gains, params, policy, 0.005)
    assert sol.common_throughput >= oracle.common_throughput - 1e-9
    # the gap is the continuity loss of a 0.005 grid, well under one percent
    assert sol.common_throughput <= oracle.common_throughput * 1.01


@pytest.mark.parametrize("g", INSTANCES[:4])
def test_local_refinement_agrees(g, params, policy):
    sol = maximize_common_throughput(g, params, policy)
    oracle = grid_oracle(g, params, policy, 0.02)
    refined = refine_from(oracle.allocation, g, params, policy, oracle.common_throughput)
    assert refined == pytest.approx(sol.common_throughput, rel=1e-6)


def test_symmetric_instance(fig_gains, params):
    sol = maximize_common_throughput(fig_gains, params)
    assert abs(sol.breakdown.r1 - sol.breakdown.r2) <= 1e-9
    assert abs(sol.allocation.t21 - sol.allocation.t22) <= 1e-6


@pytest.mark.parametrize("change", [{"beta": 1.0}, {"mu1": 0.0, "mu2": 0.0}])
def test_no_backscatter_capacity_gives_zero(change, fig_gains):
    p = SystemParams().replace(**change)
    sol = maximize_common_throughput(fig_gains, p)
    assert sol.common_throughput == 0.0
    assert "exchange impossible" in sol.diagnostics.message
    assert_valid(sol)
    assert grid_oracle(fig_gains, p, resolution=0.05).common_throughput == 0.0


def test_nested_grids_never_decrease(params, policy):
    g = INSTANCES[2]
    values = [grid_oracle(g, params, policy, r).common_throughput for r in (0.25, 0.125, 0.025, 0.005)]
    assert values == sorted(values)


def test_coarse_grid_tie_break_symmetric(fig_gains, params, policy):
    a = grid_oracle(fig_gains, params, policy, 0.25).allocation
    assert a.t21 == a.t22
    assert (a.t1, a.t21, a.t22) == (0.0, 0.25, 0.25)


def test_grid_rejects_bad_resolution(fig_gains, params):
    for res in (0.0, 0.3):
        with pytest.raises(DomainError):
            grid_oracle(fig_gains, params, resolution=res)


@pytest.mark.parametrize("g", INSTANCES[:4])
@pytest.mark.parametrize("fields", [("h_e1",), ("h_e2",), ("h_1a",), ("h_2a",), ("h_12", "h_21")])
def test_more_gain_never_hurts(g, fields, params):
    # the inter-user link is reciprocal, so it is one channel
    base = maximize_common_throughput(g, params).common_throughput
    more = maximize_common_throughput(g.replace(**{f: 2 * getattr(g, f) for f in fields}), params)
    assert more.common_throughput >= base - 1e-9


@pytest.mark.parametrize("g", INSTANCES[:4])
def test_more_power_never_hurts(g, params):
    base = maximize_common_throughput(g, params).common_throughput
    assert maximize_common_throughput(g, params.replace(p0=2.0)).common_throughput >= base - 1e-9


@pytest.mark.parametrize("g", INSTANCES[:4])
def test_bisection_bracket(g, params):
    sol = maximize_common_throughput(g, params)
    d = sol.diagnostics
    assert d.converged
    assert d.z_upper - d.z_lower <= SolverConfig().z_tolerance
    # the certifying allocation reaches the lower end of the bracket
    assert sol.common_throughput >= d.z_lower * (1 - 1e-12)
    # and nothing meaningfully beats the upper end
    oracle = grid_oracle(g, params, resolution=0.05)
    refined = refine_from(oracle.allocation, g, params, HarvestPolicy(), oracle.common_throughput)
    assert refined <= d.z_upper * (1 + 1e-9)


@pytest.mark.parametrize("g", INSTANCES)
def test_max_min_equalization(g, params):
    assert len(maximize_common_throughput(g, params).diagnostics.active) >= 2


def test_own_slot_policy_changes_value(fig_gains, params):
    values = [
        maximize_common_throughput(fig_gains, params, HarvestPolicy(mode)).common_throughput
        for mode in (OwnSlotMode.NONE, OwnSlotMode.BIT_AVERAGED, OwnSlotMode.FULL)
    ]
    assert values == sorted(values)


def test_nonconvergence_carries_solution(fig_gains, params):
    with pytest.raises(SolverError) as err:
        maximize_common_throughput(fig_gains, params, cfg=SolverConfig(max_iterations=3))
    sol = err.value.solution
    assert not sol.diagnostics.converged
    assert_valid(sol)


def test_solver_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(z_tolerance=0.0)
    with pytest.raises(DomainError):
        SolverConfig(grid_resolution=0.5)


def test_positive_setup_time(fig_gains):
    p = SystemParams(t0=0.1)
    sol = maximize_common_throughput(fig_gains, p)
    assert sol.allocation.t0 == 0.1
    assert_valid(sol)
    assert sol.common_throughput < maximize_common_throughput(fig_gains, SystemParams()).common_throughput


# -- baseline -----------------------------------------------------------------

def test_benchmark_symmetric(fig_gains, params):
    sol = maximize_benchmark(fig_gains, params)
    assert abs(sol.breakdown.r1 - sol.breakdown.r2) <= 1e-9 * sol.common_throughput
    assert sol.allocation.t21 == pytest.approx(sol.allocation.t22, abs=1e-6)
    e1, e2 = sol.exchange_energies
    assert e1 == pytest.approx(e2, rel=1e-6)


def test_benchmark_against_six_dimensional_grid(params):
    h = path_loss_gain(1.0, params)
    g = ChannelGains(8.5e-5, 8.5e-5, 8.5e-6, 8.5e-6, h, h)
    sol = maximize_benchmark(g, params)
    oracle = benchmark_grid_oracle(g, params, resolution=0.02, energy_levels=5)
    assert sol.common_throughput >= oracle.common_throughput - 1e-9
    refined = refine_benchmark_from(oracle.allocation, oracle.exchange_energies, g, params,
                                    oracle.common_throughput)
    assert refined == pytest.approx(sol.common_throughput, rel=1e-6)


@pytest.mark.parametrize("g", INSTANCES[:4])
def test_benchmark_dominates_grid(g, params):
    sol = maximize_benchmark(g, params)
    assert_valid(sol)
    oracle = benchmark_grid_oracle(g, params, resolution=0.05, energy_levels=4)
    assert sol.common_throughput >= oracle.common_throughput - 1e-9


def test_benchmark_out_of_range_users(params):
    values = [
        maximize_benchmark(ChannelGains(8.5e-5, 8.5e-5, 8.5e-6, 8.5e-6, h, h), params).common_throughput
        for h in (1e-6, 1e-10, 1e-14)
    ]
    assert values == sorted(values, reverse=True)
    assert values[-1] < 1e-2 * values[0]


def test_benchmark_energies_within_harvest(fig_gains, params):
    sol = maximize_benchmark(fig_gains, params)
    led = sol.breakdown.ledger
    assert 0.0 <= led.e1_ex <= led.e1_wet
    assert 0.0 <= led.e2_ex <= led.e2_wet
