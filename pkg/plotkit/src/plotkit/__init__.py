"""Render simulation-exploration artifacts (CSV/JSON) into figures.

Consumes only the documented file formats emitted by the ecosweep CLI:
dataset CSVs, sobol index JSON, pdp/ice curve CSVs and uncertainty field
CSVs.  Five figure kinds are supported: regimes, sobol-bars, sobol-heatmap,
pdp-ice and uncertainty.
"""

__version__ = "0.1.0"

from plotkit.figures import FIGURE_KINDS, FigureSpec, render

__all__ = ["FIGURE_KINDS", "FigureSpec", "render", "__version__"]
