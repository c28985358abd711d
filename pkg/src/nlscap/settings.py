"""Default configuration for `nlscap`.

The numerical policies of the proofs are module-level values that can be changed from
the outside, for instance:

>>> import nlscap
>>> nlscap.settings.NEWTON_TOLERANCE = 1e-13
>>> nlscap.settings.W0_SUBDIVISIONS = 128
>>> nlscap.settings.NEWTON_TOLERANCE = 1e-12
>>> nlscap.settings.W0_SUBDIVISIONS = 64
"""

from __future__ import annotations

import math
import multiprocessing
from enum import Enum, auto
from os.path import dirname, join, realpath

__NLSCAP_PATH = dirname(realpath(__file__))
EQUILIBRIA_DEFINITIONS_PATH: str = join(__NLSCAP_PATH, "equilibria.yml")
"""Named equilibrium families that ship with the package."""

DEFAULT_NU: float = 1.0
"""Weight ν of the sequence spaces; all proofs run in ℓ¹ with ν = 1."""

NEWTON_TOLERANCE: float = 1e-12
NEWTON_MAX_ITERATIONS: int = 50

RADII_INITIAL_INFLATION: float = 1e-12
"""First relative offset above the smallest root of the radii polynomial."""
RADII_MAX_CANDIDATES: int = 60

RESONANCE_THRESHOLD: float = 1e-8
"""Smallest admissible modulus of a divisor in the manifold recurrence."""

COLLOCATION_TOLERANCE: float = 1e-10
COLLOCATION_MAX_ITERATIONS: int = 30

W0_SUBDIVISIONS: int = 64
"""Number of Chebyshev subintervals per time step for the zero-mode evolution."""

INCLUSION_CANDIDATES: int = 40
"""Number of geometric tube-radius candidates tried per time step."""

STABLE_SET_GRID_SIZE: int = 60
STABLE_SET_GRID_SPAN: float = 1e3
"""The r-search covers ``[ρ₁, span·ρ₁]`` on a logarithmic grid."""

THETA_SCAN_SIZE: int = 32
"""Number of eigenvector angles tried by the nonrigorous pre-scan."""
DEFAULT_THETA: float = 29 * math.pi / 16
"""Eigenvector angle of the default proof, a point of the scan grid.

With it the u1 orbit from ``P(1)`` enters a stable ball within twenty steps of size
2.5e-3; with θ = 0 it does not.
"""


class StopPolicy(Enum):
    """When to stop marching forward in time."""

    STABLE_SET = auto()
    """Try the stable-set check after every step and stop at the first success."""
    MAX_STEPS = auto()
    """March the full schedule, then check the stable set once."""

    @staticmethod
    def from_str(description: str) -> StopPolicy:
        description_lower = description.lower().replace("_", "-")
        if description_lower.startswith("stable"):
            return StopPolicy.STABLE_SET
        if description_lower.startswith("max"):
            return StopPolicy.MAX_STEPS
        msg = f'Could not determine stop policy from "{description}"'
        raise ValueError(msg)


class Sector(Enum):
    """Side of time in which homogeneous solutions decay."""

    FORWARD = auto()
    BACKWARD = auto()

    @staticmethod
    def from_str(description: str) -> Sector:
        description_lower = description.lower()
        if description_lower.startswith("f"):
            return Sector.FORWARD
        if description_lower.startswith("b"):
            return Sector.BACKWARD
        msg = f'Could not determine sector from "{description}"'
        raise ValueError(msg)


class NumberOfThreads:
    __n_cores: int | None = None

    @classmethod
    def get(cls) -> int:
        if cls.__n_cores is None:
            return multiprocessing.cpu_count()
        return cls.__n_cores

    @classmethod
    def set(cls, n_cores: int | None) -> None:
        """Set the number of threads; use `None` for all available cores."""
        if n_cores is not None and not isinstance(n_cores, int):
            msg = (
                "Can only set the number of cores to an integer or to None (meaning all"
                " available cores)"
            )
            raise TypeError(msg)
        cls.__n_cores = n_cores
