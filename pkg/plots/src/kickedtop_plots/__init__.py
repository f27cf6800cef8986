"""Figure rendering for kicked-top CSV outputs."""

__version__ = "0.1.0"

from .render import FigureSpec, PlotInputError, fit_power_law, load_columns, render
