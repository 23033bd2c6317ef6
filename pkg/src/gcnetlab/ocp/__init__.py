from .shooting import (  # noqa: F401
    BANGBANG_SCHEDULE,
    HOMOTOPY_SCHEDULE,
    ShootingSolution,
    fd_jacobian,
    newton,
    pack_params,
    reconstruct_control_table,
    sample_extremal,
    solve_landing,
    solve_transfer,
)
from .bundle import BundleConfig, GenerationReport, generate_bundle  # noqa: F401
from .scenario import design_landing_scenario, design_transfer_scenario  # noqa: F401
