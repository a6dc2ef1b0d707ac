"""Correlation functions of characteristic polynomials of i.i.d. non-Hermitian random matrices."""

from .asymptotics import (
    asymptotic_kernel,
    barnes_g_log,
    f1_asymptote,
    f1_quadrature,
    moment_prediction,
    saddle_lambda0,
    theorem1_prediction,
    webb_wong_prediction,
)
from .distributions import EntryDistributionSpec, cumulant_22, verify_moment_conditions
from .ginue import av_confluent, av_correlation, ginue_Fm_scaled, ginue_theorem_ratio_exact, kernel_Kn
from .hciz import HCIZInput, haar_sample_unitary, hciz_closed_form, hciz_mc
from .logvalue import LogValue
from .matrix import char_poly_log_product, log_abs_det_sq, sample_matrix
from .mc import MCConfig, MCEstimate, estimate_Fm, estimate_theorem_ratio, jackknife_error
from .points import PointConfig

__version__ = "0.1.0"
