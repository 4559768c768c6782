"""Rough volatility under the historical and pricing measures.

Simulation of rough Bergomi dynamics with a volatility risk premium, Monte
Carlo checks of the measure change, estimation of roughness and correlation
from daily data, and extraction of the premium from variance-swap quotes.
"""

from .curves import PiecewiseCurve
from .gauss import DriverConfig, DriverPaths, simulate_drivers
from .kernels import GammaKernel, HolderIndices, PowerLawKernel
from .models import (
    CirPremium,
    DeterministicPremium,
    ItoDiffusionPremium,
    ModelParams,
    StateDependentPremium,
    simulate_p_measure,
    simulate_q_measure,
)

__version__ = "0.1.0"

__all__ = [
    "PiecewiseCurve",
    "DriverConfig",
    "DriverPaths",
    "simulate_drivers",
    "GammaKernel",
    "HolderIndices",
    "PowerLawKernel",
    "ModelParams",
    "DeterministicPremium",
    "ItoDiffusionPremium",
    "CirPremium",
    "StateDependentPremium",
    "simulate_p_measure",
    "simulate_q_measure",
]
