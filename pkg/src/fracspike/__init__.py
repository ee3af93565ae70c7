"""fracspike: multi-spike standing waves of the fractional NLS.

Numerically constructs, corrects, and validates concentrating spike solutions
of eps^(2s) (-Delta)^s u + V(x) u = u^p on a periodic box: ground-state
profiles, superposition ansatz, projected linear theory, nonlinear correction,
and the reduced finite-dimensional problem in the spike locations.
"""

__version__ = "0.1.0"

from fracspike.grid import Field, FracParams, Grid

__all__ = ["Grid", "Field", "FracParams", "__version__"]
