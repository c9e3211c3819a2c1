"""Adiabatic and non-adiabatic force of an ideal quantum gas on a moving wall."""
__version__ = "0.1.0"

from .errors import (CavityForceError, ConfigError, ConsistencyError, DomainError,
                     NumericError, RootSearchError, TruncationError)
from .schedule import (ForceBreakdown, OccupationModel, SpectralState, WallSchedule,
                       adiabatic_force, box_eigensystem, eval_length,
                       occupation_weight, scaled_time)

__all__ = [
    "__version__",
    "CavityForceError", "ConfigError", "ConsistencyError", "DomainError",
    "NumericError", "RootSearchError", "TruncationError",
    "ForceBreakdown", "OccupationModel", "SpectralState", "WallSchedule",
    "adiabatic_force", "box_eigensystem", "eval_length", "occupation_weight",
    "scaled_time",
]
