"""Monte Carlo simulator for subgroup-centric multicasting in cell-free
massive MIMO with distributed conjugate-beamforming precoders."""

__version__ = "0.1.0"

from .errors import ConfigurationError

__all__ = ["ConfigurationError", "__version__"]
