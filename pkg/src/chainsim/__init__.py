"""Polarization transport in spin chains: closed-form free-fermion engine and dense oracle."""

from .chain import (
    ChainPreset,
    CouplingTable,
    DeviationState,
    HamiltonianKind,
    ModeGrid,
    dipolar_couplings,
    mode_grid,
    nearest_neighbor_couplings,
)
from .errors import (
    AliasingError,
    ChainSimError,
    ConfigError,
    CrossCheckError,
    InvalidChainError,
    InvalidInputError,
    InvalidStateError,
    ResourceLimitError,
    UnsupportedModelError,
)
from .series import ExperimentReport, TimeSeries

__version__ = "0.1.0"

__all__ = [
    "AliasingError",
    "ChainPreset",
    "ChainSimError",
    "ConfigError",
    "CouplingTable",
    "CrossCheckError",
    "DeviationState",
    "ExperimentReport",
    "HamiltonianKind",
    "InvalidChainError",
    "InvalidInputError",
    "InvalidStateError",
    "ModeGrid",
    "ResourceLimitError",
    "TimeSeries",
    "UnsupportedModelError",
    "dipolar_couplings",
    "mode_grid",
    "nearest_neighbor_couplings",
]
