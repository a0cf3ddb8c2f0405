"""Offline plotting for spinctl output files (Wigner spheres, density-matrix
bars, batch histograms, squeezing curves). Presentation only."""

from .figures import FIGURE_KINDS, histograms, rho_bars, squeeze_curve, wigner_sphere
from .schema import SchemaError

__version__ = "0.1.0"
