"""Exact calculator for invariants of weighted Kähler geometry on toric data."""

from .dh import Measure, barycenter, barycenter_p1_closed_form, moment, vol_v
from .fibration import (
    BasisFactor,
    FibrationReport,
    FibrationSpec,
    compatible_beta_fano_fiber,
    compatible_beta_general,
    compatibly_fano_check,
    p1_beta,
    sgr_beta,
    sgr_compatibly_fano_probe,
    zz_delta,
    zz_equivalence,
)
from .geometry import (
    Polytope,
    ToricClassFamily,
    combine_class,
    kahler_threshold,
    polytope_from_halfspaces,
    polytope_from_vertices,
)
from .invariants import BetaReport, beta_delta_report, beta_upper_bound, fano_toric_beta, scaling_transport
from .scalar import ValidationError
from .weights import Constant, Expression, LogAffine, PolyProduct

__version__ = "0.1.0"

__all__ = [
    "BasisFactor",
    "BetaReport",
    "Constant",
    "Expression",
    "FibrationReport",
    "FibrationSpec",
    "LogAffine",
    "Measure",
    "PolyProduct",
    "Polytope",
    "ToricClassFamily",
    "ValidationError",
    "barycenter",
    "barycenter_p1_closed_form",
    "beta_delta_report",
    "beta_upper_bound",
    "combine_class",
    "compatible_beta_fano_fiber",
    "compatible_beta_general",
    "compatibly_fano_check",
    "fano_toric_beta",
    "kahler_threshold",
    "moment",
    "p1_beta",
    "polytope_from_halfspaces",
    "polytope_from_vertices",
    "scaling_transport",
    "sgr_beta",
    "sgr_compatibly_fano_probe",
    "vol_v",
    "zz_delta",
    "zz_equivalence",
]
