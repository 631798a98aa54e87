"""Render log-log convergence figures from solver sweep CSV files."""

from .plots import PlotSpec, fit_slope, render

__version__ = "0.1.0"

__all__ = ["PlotSpec", "fit_slope", "render", "__version__"]
