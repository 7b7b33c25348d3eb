"""Information geometry of Gaussian and inverted-oscillator models: curvature,
geodesic flow, Jacobi fields and entropy growth of swept statistical volumes."""

from .errors import IgdynError
from .geometry import Backend
from .models import (
    CorrelatedGaussianModel,
    GaussianPairModel,
    GaussianProductModel,
    JacobiIHOModel,
    ParameterPoint,
)

__all__ = [
    "Backend",
    "CorrelatedGaussianModel",
    "GaussianPairModel",
    "GaussianProductModel",
    "IgdynError",
    "JacobiIHOModel",
    "ParameterPoint",
]
__version__ = "0.1.0"
