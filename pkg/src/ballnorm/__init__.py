"""Ball-average difference operators and Besov / Triebel-Lizorkin norms on the torus."""
from .torus import GridSpec, SampledField, SpectralField, forward_transform, inverse_transform, lp_norm
from .multipliers import BodySpec, RadialMultiplierTable, A_ell, ball_hat, m_ell, tabulate
from .filters import FilterBank, build_bank, band_project
from .averaging import AverageSpec, ball_difference, higher_average
from .norms import NormParams, NormReport, ScaleRange, besov_norm, tl_norm, norm
from .harness import TestFunctionSpec, decay_slope, generate

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "SampledField", "SpectralField", "forward_transform", "inverse_transform", "lp_norm",
    "BodySpec", "RadialMultiplierTable", "A_ell", "ball_hat", "m_ell", "tabulate",
    "FilterBank", "build_bank", "band_project",
    "AverageSpec", "ball_difference", "higher_average",
    "NormParams", "NormReport", "ScaleRange", "besov_norm", "tl_norm", "norm",
    "TestFunctionSpec", "decay_slope", "generate",
]
