"""Figure rendering for seqstop result CSVs."""

from .figures import KINDS, FigureSpec, RenderedFigure, SchemaError, render

__version__ = "0.1.0"
