"""Symmetry-breaking instabilities of square convection patterns.

Group actions of D4 x T^2, pitchfork and Hopf normal forms with pattern
drift, a low-order magnetoconvection model, and the numerics to find,
follow and label its equilibria and periodic orbits.
"""

from .classify import SolutionLabel, classify_equilibrium, classify_orbit, drift_profile
from .models import (
    get_model,
    nf_branches,
    primary_branches,
    thresholds,
    to_cartesian,
    to_polar,
    tsq_branch,
    dtsq_branch,
)
from .states import (
    AmplitudeState,
    HopfNFParams,
    HopfNFState,
    ModelParams,
    ModeState,
    PitchforkNFParams,
    PitchforkNFState,
    PolarState,
)
from .symmetry import (
    GroupElement,
    SpatioTemporalSymmetry,
    act_on_modes,
    act_on_nf,
    act_on_orbit,
    compose,
    isotropy_of_state,
    verify_equivariance,
)

__version__ = "0.1.0"
