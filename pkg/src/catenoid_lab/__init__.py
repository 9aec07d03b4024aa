"""Numerical laboratory for linear waves on the Riemannian catenoid."""
from .config import ExperimentConfig, load_config
from .geometry import Geometry, RadialGrid

__version__ = "0.1.0"

__all__ = ["ExperimentConfig", "Geometry", "RadialGrid", "load_config", "__version__"]
