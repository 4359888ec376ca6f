"""wavelab: a numerical laboratory for radial wave equations in 3D."""

__version__ = "0.1.0"

from .core import (
    CharProfile,
    GridMismatchError,
    ModelParams,
    RadialGrid,
    RadialPair,
    WindowError,
    from_characteristic,
    grid_for_radius,
    pointwise_radial_bound_check,
    regularize,
    to_characteristic,
    truncate_TA,
)
from .field import SpaceTimeField
from .norms import ConeRegion, NormValue, em_energy, em_energy_pair, lm_norm, s_norm

__all__ = [
    "__version__",
    "CharProfile",
    "ConeRegion",
    "GridMismatchError",
    "ModelParams",
    "NormValue",
    "RadialGrid",
    "RadialPair",
    "SpaceTimeField",
    "WindowError",
    "em_energy",
    "em_energy_pair",
    "from_characteristic",
    "grid_for_radius",
    "lm_norm",
    "pointwise_radial_bound_check",
    "regularize",
    "s_norm",
    "to_characteristic",
    "truncate_TA",
]
