"""Figure generation for cfsim CSV results."""

__version__ = "0.1.0"

from .figures import FigureSpec, plot_ase_vs_g, plot_cdf

__all__ = ["FigureSpec", "plot_ase_vs_g", "plot_cdf", "__version__"]
