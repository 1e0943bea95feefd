"""Parisian ruin probabilities for spectrally negative Lévy risk processes."""

from __future__ import annotations

from .asympt import conv_asympt, cramer_constant
from .laplace import (
    InversionConfig,
    InversionError,
    NumericalError,
    QuadratureConfig,
)
from .mc import MCConfig, MCEstimate, estimate_classical, estimate_constant, estimate_parisian
from .model import (
    DomainError,
    Exponential,
    MixtureOfExponentials,
    Pareto,
    RiskModel,
    StableComponent,
    model_from_dict,
    model_to_dict,
)
from .parisian import ParisianResult, parisian_constant, parisian_ruin
from .scale import ScaleContext, classical_ruin, scale_w, scale_z

__all__ = [
    "DomainError",
    "Exponential",
    "InversionConfig",
    "InversionError",
    "MCConfig",
    "MCEstimate",
    "MixtureOfExponentials",
    "NumericalError",
    "Pareto",
    "ParisianResult",
    "QuadratureConfig",
    "RiskModel",
    "ScaleContext",
    "StableComponent",
    "classical_ruin",
    "conv_asympt",
    "cramer_constant",
    "estimate_classical",
    "estimate_constant",
    "estimate_parisian",
    "model_from_dict",
    "model_to_dict",
    "parisian_constant",
    "parisian_ruin",
    "scale_w",
    "scale_z",
]

__version__ = "0.1.0"
