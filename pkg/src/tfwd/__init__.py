"""Numerical workbench for the relativistic Thomas-Fermi-Weizsaecker-Dirac functional."""

from importlib.metadata import PackageNotFoundError, version

from . import bounds, edf, radial, semiclassic, specfun, stability
from .edf import AtomicSystem, EnergyBreakdown, MolecularSystem
from .radial import RadialDensity, RadialGrid

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.1.0"

__all__ = [
    "AtomicSystem",
    "EnergyBreakdown",
    "MolecularSystem",
    "RadialDensity",
    "RadialGrid",
    "bounds",
    "edf",
    "radial",
    "semiclassic",
    "specfun",
    "stability",
]
