"""Square negative correlation on l_p balls: closed forms, Monte Carlo
estimators and verification tools."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DomainError,
    InvariantViolation,
    PreconditionError,
    RangeError,
    SncpError,
    UnstableEstimateError,
    ValidationError,
)
from .gamma_core import gurland_F, log_gamma, log_gamma_ratio  # noqa: E402
from .moments import (  # noqa: E402
    FBallDecomposition,
    LpSpace,
    ball_decomposition,
    f_ball,
    f_canonical,
    f_rotated,
    mean_square_marginal_ball,
    moment_S,
    moment_abs_g,
    n0_threshold,
    ratio_coefficient_diag,
)
from .pairs import OrthoPair, named_pair, overlap_t  # noqa: E402
from .sampler import McEstimate, SeededStream  # noqa: E402
