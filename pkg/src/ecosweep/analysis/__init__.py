"""Phase-2 explainability and uncertainty quantification over the surrogate."""

from ecosweep.analysis.sobol import SobolIndices, sobol_indices
from ecosweep.analysis.pdp import CurveSet, pdp_ice
from ecosweep.analysis.uncertainty import UncertaintyDecomposition, UncertaintyField, combine_sigmas
from ecosweep.analysis.tipping import TippingPoint, detect_tipping_points

__all__ = [
    "CurveSet",
    "SobolIndices",
    "TippingPoint",
    "UncertaintyDecomposition",
    "UncertaintyField",
    "combine_sigmas",
    "detect_tipping_points",
    "pdp_ice",
    "sobol_indices",
]
