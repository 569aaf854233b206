from .render import PLOT_KINDS, MissingColumnError, PlotJob, read_table, render

__version__ = "0.1.0"
