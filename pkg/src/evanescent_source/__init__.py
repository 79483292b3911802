"""Wave emission from an evanescent, decaying point source in one dimension."""

__version__ = "0.1.0"

from .analysis import (
    DITScanPoint,
    Scenario,
    TimeScales,
    classify_crossings,
    density_at_tp,
    dit_amplitude_map,
    dit_first_minimum_time,
    ratio_R,
    t_max_saddle,
    t_p_scan,
    x_max_snapshot,
)
from .asymptotics import (
    density_pole,
    density_saddle,
    dit_parameters,
    dit_small_v0,
    psi_interference,
    psi_pole,
    psi_saddle,
)
from .errors import (
    ConvergenceError,
    DomainError,
    InvalidInput,
    NoMinimum,
    OverflowRegion,
    PoleProximity,
    QuiescenceViolated,
    RangeError,
    SourceModelError,
    Undefined,
)
from .model import SourceParams, flux, make_params, norm_factor, psi_exact, psi_normalized
from .oracles import GridField, GridSpec, evolve_cn, psi_quadrature
from .special import faddeeva, faddeeva_derivative

__all__ = [name for name in dir() if not name.startswith("_")]
