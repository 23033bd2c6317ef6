"""gcnetlab: guidance & control networks trained by behavioural cloning
of optimal trajectories, with closed-loop evaluation."""

__version__ = "0.1.0"

from .network import (  # noqa: F401
    Activation,
    Network,
    NetworkSpec,
    count_params,
    init_kaiming,
    init_network,
    init_siren,
)
from .losses import LOSS_KINDS, default_loss, loss_grad, loss_value  # noqa: F401
from .backprop import backward  # noqa: F401
from .optim import AdamState, PlateauScheduler, TrainConfig, adam_step  # noqa: F401
