"""Numerics for Colombeau-type generalized functions sampled on epsilon grids."""
from .expr import differentiate, evaluate, parse
from .genfun import GenPoint, Representative, derivative_along_curve, evaluate_at, gradient
from .gennum import (ClassifyConfig, EpsilonGrid, GenNet, Kind, NetClass, alpha, associated, classification,
                     classify, equals, gap_class, gen_distance, in_ball, sharp_norm, valuation)
from .holo import ContourSetup, cauchy_eval, distance_to_history, taylor_coefficients, taylor_eval
from .membrane import (Ball, Box, History, Indicator, Interval, NullPerturbation, ball_equivalence, circle,
                       history_image, perturb, segment, volume)
from .pde import (FunctionSolution, TransportProblem, WaveProblem, residual_check, transport_solve,
                  wave_energy, wave_solve)
from .quad import (QuadConfig, green_check, integrate_membrane, interval_consistency, line_integral_complex,
                   line_integral_real, mean_value_bound, rot2)

__version__ = "0.1.0"

__all__ = [
    "parse", "evaluate", "differentiate",
    "Representative", "GenPoint", "evaluate_at", "gradient", "derivative_along_curve",
    "EpsilonGrid", "GenNet", "NetClass", "Kind", "ClassifyConfig", "classification", "alpha",
    "classify", "valuation", "sharp_norm", "gen_distance", "in_ball", "equals", "associated", "gap_class",
    "Interval", "Box", "Ball", "Indicator", "History", "NullPerturbation", "circle", "segment",
    "history_image", "perturb", "ball_equivalence", "volume",
    "QuadConfig", "integrate_membrane", "line_integral_real", "line_integral_complex", "rot2",
    "green_check", "mean_value_bound", "interval_consistency",
    "ContourSetup", "distance_to_history", "cauchy_eval", "taylor_coefficients", "taylor_eval",
    "TransportProblem", "WaveProblem", "FunctionSolution", "transport_solve", "wave_solve",
    "residual_check", "wave_energy",
]
