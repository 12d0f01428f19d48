"""Steered unit-speed particles on SE(3): screw formations, consensus and simulation."""

from .commnet import GraphSchedule, GraphSnapshot, is_uniformly_connected, load_schedule
from .config import SimConfig, load_config
from .engine import EquilibriumVerdict, Kind, classify_equilibrium, simulate
from .liegroup import Pose, ScrewParams, Twist, exp_se3, screw_of_twist

__version__ = "0.1.0"

__all__ = [
    "EquilibriumVerdict",
    "GraphSchedule",
    "GraphSnapshot",
    "Kind",
    "Pose",
    "ScrewParams",
    "SimConfig",
    "Twist",
    "classify_equilibrium",
    "exp_se3",
    "is_uniformly_connected",
    "load_config",
    "load_schedule",
    "screw_of_twist",
    "simulate",
]
