"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import statistics
import time

from backcoop import kernels
from backcoop.model import SystemParams
from backcoop.rates import harvest_rates
from backcoop.solver import benchmark_grid_oracle, grid_oracle, maximize_benchmark
from backcoop.sweep import fig4_preset, point_instance


def timed(fn, repeat):
    runs = []
    for _ in range(repeat):
        t = time.perf_counter()
        value = fn()
        runs.append(time.perf_counter() - t)
    return statistics.median(runs), value


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    spec = fig4_preset()
    params, gains = point_instance(spec, 4.0, spec.schemes[1])
    base = SystemParams()
    hr = harvest_rates(gains, base)
    z = 0.9 * maximize_benchmark(gains, base).common_throughput
    feas_args = (z, base.budget, hr.wet1, hr.wet2, gains.h_1a, gains.h_2a, gains.h_12, gains.h_21,
                 base.sigma0_sq, base.bandwidth, 1e-12)

    cases = [
        ("grid_backscatter (res 0.005)",
         lambda b: lambda: grid_oracle(gains, params, resolution=0.005, backend=b).common_throughput),
        ("grid_benchmark (res 0.02, 5 levels)",
         lambda b: lambda: benchmark_grid_oracle(gains, base, backend=b).common_throughput),
        ("benchmark_feasibility (one probe)",
         lambda b: lambda: kernels.get_backend(b).benchmark_feasibility(*feas_args)[0]),
    ]
    print(f"{'kernel':38s} {'cython':>10s} {'python':>10s} {'speedup':>8s}  same result")
    for name, make in cases:
        tc, vc = timed(make("cython"), args.repeat)
        tp, vp = timed(make("python"), args.repeat)
        print(f"{name:38s} {tc * 1e3:8.2f}ms {tp * 1e3:8.2f}ms {tp / tc:7.1f}x  {vc == vp}")


if __name__ == "__main__":
    main()
