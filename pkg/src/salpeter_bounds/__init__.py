"""Energy bounds for semirelativistic N-boson systems."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundPair,
    BoundResult,
    EnergyCurve,
    SystemParams,
    bounds_for,
    check_coulomb_validity,
    lower_bound_envelope,
    lower_bound_oscillator,
    scaled_one_body,
    sweep_curve,
    ultra_bounds,
    upper_bound_variational,
)
from .eigensolver import (  # noqa: E402
    EigensolveConfig,
    KernelFunction,
    build_kernel,
    default_kernel,
    load_kernel,
    save_kernel,
    solve_e,
)
from .errors import (  # noqa: E402
    BoundsError,
    BracketError,
    ConfigurationError,
    ConvergenceError,
    ConvexityError,
    DomainError,
    NonFiniteError,
)
from .optimize import maximize, minimize  # noqa: E402
from .potentials import custom_potential, parse_potential, power_law  # noqa: E402
from .special import AIRY_FIRST_ZERO, bessel_k1, gamma, scaled_exp_k1  # noqa: E402
