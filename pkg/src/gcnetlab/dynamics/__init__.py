from .drone import (  # noqa: F401
    DroneParams,
    DroneSystem,
    drone_cost,
    drone_derivative,
    drone_forces,
    drone_moments,
    euler_rate_matrix,
    rotation_body_to_world,
)
from .spaceflight import (  # noqa: F401
    LandingParams,
    LandingSystem,
    TransferParams,
    TransferSystem,
    landing_derivative,
    normalize_direction,
    rotating_energy,
    transfer_derivative,
)
from .integrate import Trajectory, propagate_closed_loop, rk4_integrate  # noqa: F401
from .policies import ConstantPolicy, NetworkPolicy, SampledPlayback  # noqa: F401
