"""Zero counts and gap zeros of polynomials orthogonal on several intervals.

The package predicts, for a weight R/(Wh) supported on a union E of real
bands, how the zeros of the orthonormal polynomials distribute among the
bands and gaps, and verifies the predictions against directly computed
polynomials.  Layers, from the geometry up:

  geometry   band systems, the branch of sqrt(H), weight specifications
  quadrature singularity-aware integration on bands, gaps, and tails
  greens     Green's function data: harmonic measures, phi(z, inf), psi
  surface    first-kind differentials, periods, Abel map, real inversion
  orthopoly  recurrence coefficients, zeros, Pell-equation verification
  predictor  count vectors, gap forecasts, congruence checks, experiments
  report     deterministic CSV/JSON emission and optional figures
  cli        command-line front end
"""

from .errors import (
    BandzerosError,
    DomainError,
    InvariantError,
    NearDegenerateWarning,
    NonConvergenceError,
    QuadratureError,
    WeightError,
)
from .geometry import (
    BernsteinSzegoWeight,
    IntervalSystem,
    PolynomialFactorization,
    SmoothWeight,
    WeightSpec,
    validate,
    weight_density,
)
from .greens import compute_r_inf, green_phi_inf, harmonic_measures
from .orthopoly import (
    count_zeros,
    discretize,
    pell_data,
    polynomial_zeros,
    stieltjes_recurrence,
)
from .predictor import (
    accumulation_experiment,
    compare,
    compute_V,
    forecast_gaps,
    rational_periodicity,
    verify_congruence,
    weight_transform,
)
from .surface import normalize_differentials, period_matrix, solve_inversion

__version__ = "0.1.0"

__all__ = [
    "BandzerosError",
    "BernsteinSzegoWeight",
    "DomainError",
    "IntervalSystem",
    "InvariantError",
    "NearDegenerateWarning",
    "NonConvergenceError",
    "PolynomialFactorization",
    "QuadratureError",
    "SmoothWeight",
    "WeightSpec",
    "accumulation_experiment",
    "compare",
    "compute_V",
    "compute_r_inf",
    "count_zeros",
    "discretize",
    "forecast_gaps",
    "green_phi_inf",
    "harmonic_measures",
    "normalize_differentials",
    "pell_data",
    "period_matrix",
    "polynomial_zeros",
    "rational_periodicity",
    "solve_inversion",
    "stieltjes_recurrence",
    "validate",
    "verify_congruence",
    "weight_density",
    "weight_transform",
    "__version__",
]
