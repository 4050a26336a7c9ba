"""Backscatter-assisted user cooperation in a two-user wireless powered network."""
from .kernels import BACKEND
from .model import (
    ChannelGains,
    DomainError,
    SystemParams,
    TimeAllocation,
    Topology,
    gains_from_topology,
    path_loss_gain,
    validate,
)
from .rates import (
    Direction,
    EnergyLedger,
    HarvestPolicy,
    OwnSlotMode,
    RateBreakdown,
    benchmark_rates,
    ber_backscatter,
    bsc_capacity,
    overall_rates,
)
from .solver import (
    Solution,
    SolverConfig,
    SolverError,
    benchmark_grid_oracle,
    grid_oracle,
    maximize_benchmark,
    maximize_common_throughput,
)

__version__ = "0.1.0"
