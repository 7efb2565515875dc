"""Figure rendering for fdd-mimo CSV results."""

__version__ = "0.1.0"

from .render import FigureSpec, RenderError, RenderResult, render
