"""Discrete analysis of saddle-tower gluing configurations."""

from .errors import SaddleConfigError
from .model import (
    Configuration,
    DeformationVector,
    GeometricGraph,
    PseudoRotationSystem,
    build_graph,
    load_config,
    make_configuration,
    save_config,
)

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "DeformationVector",
    "GeometricGraph",
    "PseudoRotationSystem",
    "SaddleConfigError",
    "build_graph",
    "load_config",
    "make_configuration",
    "save_config",
]
