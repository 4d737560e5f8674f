"""Variational Gaussian mixture clustering with simultaneous covariate selection."""

from .engine import FitResult, fit
from .estimator import VBVarSel
from .model import DataMatrix, Hyperparameters, InitOptions
from .schedule import ScheduleKind, TemperatureSchedule

__all__ = [
    "DataMatrix",
    "FitResult",
    "Hyperparameters",
    "InitOptions",
    "ScheduleKind",
    "TemperatureSchedule",
    "VBVarSel",
    "fit",
]

__version__ = "0.1.0"
