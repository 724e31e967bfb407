"""Ground states, anisotropy scans and dynamics of the logarithmic Schrodinger equation on R^d x T^n."""

__version__ = "0.1.0"

from .domain import Field, GridSpec, kinetic_split, mass, normalize
from .energy import EnergyBreakdown, RegularizationParams, SplitParams, energy, first_variation
from .gradflow import FlowConfig, FlowResult, minimize
from .oracle import GaussonSpec, gausson_energy, lambda_of_mass, sample_gausson, waveguide_reference

__all__ = [
    "EnergyBreakdown",
    "Field",
    "FlowConfig",
    "FlowResult",
    "GaussonSpec",
    "GridSpec",
    "RegularizationParams",
    "SplitParams",
    "energy",
    "first_variation",
    "gausson_energy",
    "kinetic_split",
    "lambda_of_mass",
    "mass",
    "minimize",
    "normalize",
    "sample_gausson",
    "waveguide_reference",
]
