"""Singular-regular solver for the Laplace Dirichlet problem on the unit cube."""

__version__ = "0.3.0"

from .errors import (ConfigError, GeometryError, QuadratureError, RangeError, SingularityError,  # noqa: E402
                     SolveError, SRCubeError, StepError, TruncationError)
from .geometry import BoundaryData, Face, Point3  # noqa: E402
from .pipeline import ProblemSpec, Solution, evaluate, evaluate_many, load_solution, save_solution, solve  # noqa: E402
