"""Mixed subdiffusion / fractional-wave problem: forward spectral solver and
two-stage recovery of the fractional orders (alpha, beta)."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AuditError,
    ConvergenceError,
    FracmixError,
    NonUniquenessError,
    ParameterDomainError,
    SolvabilityError,
)
from .forward import (  # noqa: F401
    FractionalOrders,
    OrderBox,
    build_setup,
    delta_k,
    evaluate_solution,
    norm_functional_W,
    ratio_P,
    solve_gluing,
)
from .inverse import ObservationPair, observe, recover  # noqa: F401
from .kernels import BACKEND  # noqa: F401
from .special import digamma, gamma, mittag_leffler  # noqa: F401
from .spectral import DomainSpec, build_basis, fourier_coefficients, from_coefficients  # noqa: F401
