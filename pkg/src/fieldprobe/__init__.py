"""Gaussian lattice field states, their region normal modes, detector swaps
and band-limited continuum profiles."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .gaussian import (
    log_negativity,
    partial_transpose,
    symplectic_spectrum,
    two_mode_squeezed,
    von_neumann_entropy,
    williamson,
)
from .lattice import LatticeSpec, ground_state
from .regions import (
    ModeProfile,
    Region,
    entanglement_captured,
    normal_modes,
    partner_mode,
    saturation_count,
)
