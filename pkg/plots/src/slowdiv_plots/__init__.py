"""Render figures from slowdiv CSV artifacts.

This package never imports the numerical toolkit and never recomputes any
of its quantities: everything plotted comes verbatim from the CSV files a
run leaves behind.  See KINDS in figures.py for the five figure kinds and
the artifact each one consumes.
"""

from .errors import PlotDataError
from .figures import (
    KINDS,
    fig_bifurcation,
    fig_cobweb,
    fig_dimension_fit,
    fig_phase_portrait,
    fig_sdi_curve,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "PlotDataError",
    "fig_bifurcation",
    "fig_cobweb",
    "fig_dimension_fit",
    "fig_phase_portrait",
    "fig_sdi_curve",
    "render",
    "__version__",
]
