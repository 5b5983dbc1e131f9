"""
hypcircle: circle averages on hyperbolic surfaces, their spectral
expansion, equidistribution statistics and lattice-point counting.
"""

__version__ = "1.0.0"

from .circle_average import G_coefficient, k_theta, k_theta_derivatives, translate_average
from .counting import averaged_count, count, error_exponent
from .errors import HypCircleError
from .fuchsian import FuchsianGroup, enumerate_orbit_ball, sample_quotient, triangle_group
from .hyperbolic import HPoint, ball_area, hyp_dist, mobius, sphere_integrate
from .observables import SpectralParams, gamma_bump, model_eigenfunction, mollifier_family, unfolded_average
from .sl2 import SL2Matrix, cartan, exp_lie
from .spectral import compute_coefficients, expansion_eval, solve_cauchy
from .stats import decay_rate, deviation_law, levy_prokhorov

__all__ = [
    "__version__",
    "HypCircleError",
    "SL2Matrix", "cartan", "exp_lie",
    "HPoint", "mobius", "hyp_dist", "ball_area", "sphere_integrate",
    "FuchsianGroup", "triangle_group", "enumerate_orbit_ball", "sample_quotient",
    "SpectralParams", "model_eigenfunction", "gamma_bump", "mollifier_family", "unfolded_average",
    "k_theta", "k_theta_derivatives", "G_coefficient", "translate_average",
    "compute_coefficients", "expansion_eval", "solve_cauchy",
    "decay_rate", "deviation_law", "levy_prokhorov",
    "count", "error_exponent", "averaged_count",
]
