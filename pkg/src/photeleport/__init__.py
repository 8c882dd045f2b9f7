"""Second-quantized photon teleportation on a momentum lattice."""

from .algebra import (
    Generator,
    ModeLabel,
    OperatorSum,
    OperatorWord,
    annihilate,
    create,
    inner_product,
    normal_order,
    vev,
    vev_wick,
)
from .field import (
    BELL_KINDS,
    MomentumGrid,
    PhotonWaveFunction,
    build_bell_operator,
    build_epr_pair,
    build_labeled_bell,
    gaussian_packet,
    plane_wave,
)
from .kernels import BACKEND
from .propagator import SpacetimePoint, d0_minus, d0_plus, vev_matches_propagator
from .teleportation import (
    decompose_initial_state,
    exchange_term,
    run_full_teleport,
    run_nonrel_limit,
    run_polarization_teleport,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BELL_KINDS",
    "Generator",
    "ModeLabel",
    "MomentumGrid",
    "OperatorSum",
    "OperatorWord",
    "PhotonWaveFunction",
    "SpacetimePoint",
    "annihilate",
    "build_bell_operator",
    "build_epr_pair",
    "build_labeled_bell",
    "create",
    "d0_minus",
    "d0_plus",
    "decompose_initial_state",
    "exchange_term",
    "gaussian_packet",
    "inner_product",
    "normal_order",
    "plane_wave",
    "run_full_teleport",
    "run_nonrel_limit",
    "run_polarization_teleport",
    "vev",
    "vev_matches_propagator",
    "vev_wick",
    "__version__",
]
