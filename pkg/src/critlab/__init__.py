"""Construction and numerical verification of critical metrics of the volume functional."""
from .errors import (
    ConstructionError,
    CritlabError,
    DomainError,
    NotCriticalError,
    UnsupportedDomainError,
)
from .geometry import CriticalSolution, SpaceForm, WarpedMetric
from .solutions import BallSpec, SchwarzschildSpec, construct_ball, construct_schwarzschild

__version__ = "0.1.0"

__all__ = [
    "BallSpec",
    "ConstructionError",
    "CriticalSolution",
    "CritlabError",
    "DomainError",
    "NotCriticalError",
    "SchwarzschildSpec",
    "SpaceForm",
    "UnsupportedDomainError",
    "WarpedMetric",
    "construct_ball",
    "construct_schwarzschild",
]
