"""Post-hoc figure generation for riet simulation outputs."""

from .figures import FigureError, FigureInput, FigureSpec, load_spec, render

__version__ = "0.1.0"
