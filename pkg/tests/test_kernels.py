import pytest

from backcoop import kernels
from backcoop.model import SystemParams
from backcoop.rates import harvest_rates
from backcoop.solver import benchmark_grid_oracle, grid_oracle
from backcoop.sweep import random_instances

compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled kernels not built")
INSTANCES = random_instances(4, seed=3)


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.get_backend("python") is kernels.python_backend
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@compiled
@pytest.mark.parametrize("g", INSTANCES)
def test_backscatter_grid_parity(g):
    p = SystemParams()
    a = grid_oracle(g, p, resolution=0.02, backend="cython")
    b = grid_oracle(g, p, resolution=0.02, backend="python")
    assert a.allocation == b.allocation
    assert a.common_throughput == b.common_throughput


@compiled
@pytest.mark.parametrize("g", INSTANCES)
def test_benchmark_grid_parity(g):
    p = SystemParams()
    a = benchmark_grid_oracle(g, p, resolution=0.05, energy_levels=4, backend="cython")
    b = benchmark_grid_oracle(g, p, resolution=0.05, energy_levels=4, backend="python")
    assert a.allocation == b.allocation
    assert a.exchange_energies == b.exchange_energies


@compiled
@pytest.mark.parametrize("g", INSTANCES)
@pytest.mark.parametrize("frac", [0.1, 0.5, 0.9])
def test_benchmark_feasibility_parity(g, frac):
    p = SystemParams()
    hr = harvest_rates(g, p)
    args = (p.budget, hr.wet1, hr.wet2, g.h_1a, g.h_2a, g.h_12, g.h_21, p.sigma0_sq, p.bandwidth, 1e-12)
    # probe around the scale of the grid optimum so both outcomes occur
    z = benchmark_grid_oracle(g, p, resolution=0.1, energy_levels=3).common_throughput * 2 * frac
    a = kernels.compiled_backend.benchmark_feasibility(z, *args)
    b = kernels.python_backend.benchmark_feasibility(z, *args)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)
