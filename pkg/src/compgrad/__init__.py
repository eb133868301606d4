"""Gradient testing and estimation with a comparison oracle."""
from .comparator import (Adversarial, AlwaysMinus, AlwaysPlus, ComparisonOracle, RandomSeeded,
                         tie_policy_from_name)
from .dp import DpKind, DpVerdict, dp
from .estimation import EstimateResult, estimate, estimate_constant
from .functions import (FunctionModel, HyperplaneInstance, QuadraticModel, make_hyperplane,
                        make_quadratic, random_quadratic)
from .geometry import (OrthonormalFrame, UnitVector, rotate_to_e1, sample_haar_frame,
                       sample_sphere)
from .testing import Answer, TestParams, TestVerdict, test_deterministic, test_randomized

__version__ = "0.1.0"

__all__ = [
    "Adversarial", "AlwaysMinus", "AlwaysPlus", "ComparisonOracle", "RandomSeeded",
    "tie_policy_from_name", "DpKind", "DpVerdict", "dp", "EstimateResult", "estimate",
    "estimate_constant", "FunctionModel", "HyperplaneInstance", "QuadraticModel",
    "make_hyperplane", "make_quadratic", "random_quadratic", "OrthonormalFrame", "UnitVector",
    "rotate_to_e1", "sample_haar_frame", "sample_sphere", "Answer", "TestParams", "TestVerdict",
    "test_deterministic", "test_randomized",
]
