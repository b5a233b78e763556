"""Power control for interference-limited networks via successive GP solves."""

from .gp import (
    ConvexForm,
    GpProblem,
    GpSolution,
    GpStatus,
    SolverOptions,
    kkt_residual,
    solve,
    to_convex,
)
from .oracle import OracleResult, grid_search, vertex_enumeration
from .posynomial import (
    DEFAULT_TERM_CAP,
    Monomial,
    Posynomial,
    PosynomialError,
    TermLimitError,
    VariableRegistry,
    mono_eval,
    posy_eval,
    posy_mul,
)
from .power import (
    CondensedMonomial,
    InfeasibleError,
    InfeasibleInitialError,
    PowerControlProblem,
    ScaReport,
    SolverFailureError,
    StandardForm,
    build_standard_form,
    condense_agm,
    condense_factorwise,
    feasible_init,
    muted_links,
    rate_product_posynomial,
    rates,
    sca_solve,
    sinr,
    weighted_sum_rate,
)
from .scenario import (
    NetworkConfig,
    PathLossModel,
    Realization,
    Scenario,
    antenna_gain,
    build_hex_network,
    gain_matrix,
    olpc_power,
    path_loss,
    place_uavs,
    thermal_noise,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
