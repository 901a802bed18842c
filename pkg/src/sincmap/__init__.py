"""Singularity-adapted double exponential transforms for the trapezoidal rule and Sinc methods."""

from .box import BoxProblem, Variant, box_expectation_reduced, box_expectation_tensor
from .catalog import CATALOG, ProblemSpec, get_problem, load_problem, problem_from_dict
from .errors import (ConfigurationError, DegenerateStepError, DomainError, EvaluationError,
                     IllConditionedError, MonotonicityError, NonConvergenceError,
                     OptimizationError, SincMapError)
from .expr import Expression, ParseError, parse
from .hilbert import (BOProblem, LorentzianSumSolution, discrete_hilbert, solve_benjamin_ono)
from .optimizer import ParameterSolution, optimize_map, preimages, solve_parameter_problem
from .quadrature import DecayParams, RuleConfig, convergence_study, optimal_step, trapezoid
from .sinc import (SincExpansion, SincPadeApproximant, adaptive_integrate, fit_sinc_pade,
                   pade_poles, sinc_basis)
from .transforms import ConformalTransform, OuterMap, SinhPolyMap, plain_de, single_exponential

__version__ = "0.1.0"

__all__ = [
    "BOProblem", "BoxProblem", "CATALOG", "ConfigurationError", "ConformalTransform",
    "DecayParams", "DegenerateStepError", "DomainError", "EvaluationError", "Expression",
    "IllConditionedError", "LorentzianSumSolution", "MonotonicityError", "NonConvergenceError",
    "OptimizationError", "OuterMap", "ParameterSolution", "ParseError", "ProblemSpec",
    "RuleConfig", "SincExpansion", "SincMapError", "SincPadeApproximant", "SinhPolyMap",
    "Variant", "adaptive_integrate", "box_expectation_reduced", "box_expectation_tensor",
    "convergence_study", "discrete_hilbert", "fit_sinc_pade", "get_problem", "load_problem",
    "optimal_step", "optimize_map", "pade_poles", "parse", "plain_de", "preimages",
    "problem_from_dict", "single_exponential", "sinc_basis", "solve_benjamin_ono",
    "solve_parameter_problem", "trapezoid",
]
