from src.kernels.airy import (
    k12,
    k12_block,
    k2,
    k2_block,
    k2_christoffel_darboux,
    k2_ext,
    k2_ext_block,
    k_transition,
    k_transition_block,
)
from src.kernels.extended import ExtendedKernel
from src.kernels.finite import (
    ContourParams,
    gaussian_regime_width,
    k_finite_dyn,
    k_finite_static,
    k_gauss_limit,
    phi_ou,
)
from src.kernels.hermite import SourceBasis, k_hermite, mh_first, mh_second
from src.kernels.source import SourceSpec, SpaceTimePoint, TimeGrid

__all__ = [
    "ContourParams",
    "ExtendedKernel",
    "SourceBasis",
    "SourceSpec",
    "SpaceTimePoint",
    "TimeGrid",
    "gaussian_regime_width",
    "k12",
    "k12_block",
    "k2",
    "k2_block",
    "k2_christoffel_darboux",
    "k2_ext",
    "k2_ext_block",
    "k_finite_dyn",
    "k_finite_static",
    "k_gauss_limit",
    "k_hermite",
    "k_transition",
    "k_transition_block",
    "mh_first",
    "mh_second",
    "phi_ou",
]
