"""plotkit: standard figures from wavelab experiment reports (read-only)."""

__version__ = "0.1.0"

from .figures import FigureSpec, render, render_all

__all__ = ["__version__", "FigureSpec", "render", "render_all"]
