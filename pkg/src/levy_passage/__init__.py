"""Passage times of spectrally negative Levy processes.

Laplace exponents and their right inverse, scale functions, fractional
moments of the downward passage time, a moment-existence classifier and a
Monte Carlo cross-check.
"""
from .errors import (
    DomainError,
    InversionError,
    LevyPassageError,
    ModelError,
    NumericalError,
    QuadratureError,
    RootFindingError,
    UnstableError,
    UnsupportedInputError,
)
from .model import (
    CompoundPoisson,
    Deterministic,
    Exponential,
    LevyModel,
    LogNormal,
    Pareto,
    Regime,
    StableJumps,
    jump_moment,
    laplace_exponent,
    laplace_exponent_derivative,
    mean,
    regime,
)
from .inverse import InverseExponent
from .scale import ScaleEvaluator
from .fracmoment import MarchaudConfig, marchaud, moment_from_laplace, passage_moment, upward_passage_moment
from .classify import MomentVerdict, Verdict, classify_moment, exponential_moment_abscissa
from .simulate import (
    PassageSampleSet,
    SimConfig,
    empirical_exponential_moment,
    empirical_laplace,
    empirical_moment,
    sample_passage_times,
    tail_index,
)
from .config import load_model, parse_model

__version__ = "0.1.0"
