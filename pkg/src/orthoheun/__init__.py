"""High-precision checks of the chain from orthogonal-polynomial weights to
Heun equations, isomonodromic Hamiltonians, Painleve equations and scaled
Hankel-determinant asymptotics."""

__version__ = "0.1.0"

from .mpcore import Dual2, PrecisionContext  # noqa: E402
from .weights import WeightSpec  # noqa: E402

__all__ = ["Dual2", "PrecisionContext", "WeightSpec", "__version__"]
