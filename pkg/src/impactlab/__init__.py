"""Transient market impact: kernels, Laplace inversion, optimal trajectories,
impact and cost functionals, and trading-regime experiments."""

__version__ = "0.1.0"

from .impact import (  # noqa: E402
    ConstantPrice,
    ImpactPath,
    PowerPrice,
    RateProfile,
    constant_rate_cost,
    continuous_cost,
    discrete_cost,
    impact_path,
    rate_for_price_target,
    round_trip_check,
    temporary_impact,
)
from .kernels import (  # noqa: E402
    DeltaKernel,
    DiffusionKernel,
    ExponentialKernel,
    MarketParams,
    PowerKernel,
    eval_kernel,
    eval_kernel_laplace,
    step_response,
)
from .laplace import InversionUnreliableError, invert_laplace  # noqa: E402
from .trajectories import TrajectoryProblem, ac_trajectory, exp_kernel_trajectory  # noqa: E402
