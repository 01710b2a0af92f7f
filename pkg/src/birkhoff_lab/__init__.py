"""Phase damping channels, random-unitary tests and the Birkhoff defect."""
from ._backend import BACKEND
from .birkhoff import DefectResult, OptimizerConfig, defect_series, nearest_ru
from .channels import (
    KrausChannel,
    PhaseDampingChannel,
    RUChannel,
    apply,
    coplanar_ru_decomposition,
    from_relative_states,
    fsov_volume,
    is_doubly_stochastic,
    kraus_from_gram,
    single_qubit_ru,
)
from .config import RunConfig, parse_config
from .core import (
    BlochVector,
    bloch_from_state,
    expm_unitary,
    partial_trace,
    purity,
    tensor,
    trace_norm,
)
from .diamond import HermitianPreservingMap, diamond_distance, diamond_norm, schur_diamond_norm
from .lindblad import (
    LindbladParams,
    damped_channel_at,
    dephasing_coefficients,
    integrate_full,
    lindblad_rhs,
    purity_series,
)
from .model import (
    ModelParams,
    channel_at,
    conditional_hamiltonians,
    extremality_conditions,
    relative_states,
    volume_at,
    volume_time_series,
)
from .series import TimeSeries
from .tolerances import DEFAULT as DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
