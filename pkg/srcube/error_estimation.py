"""
A-posteriori error estimate for the regular phase.

E_max is the largest discrepancy between the residual data and P_N over the reference
points; the reported bound E_R = 2 E_max leans on the maximum principle and is an
estimate, not a certified bound.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .geometry import ReferenceSet, harmonic_target, midpoint_reference, uniform_collocation

logger = logging.getLogger(__name__)

BOUND_LABEL = "estimated bound"


@dataclass(frozen=True)
class ErrorReport:
    e_max: float
    e_r: float
    J: int
    worst_point: tuple | None = None
    label: str = BOUND_LABEL

    def to_dict(self) -> dict:
        return {"e_max": self.e_max, "e_r": self.e_r, "J": self.J,
                "worst_point": None if self.worst_point is None else list(self.worst_point),
                "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "ErrorReport":
        wp = d.get("worst_point")
        return cls(e_max=d["e_max"], e_r=d["e_r"], J=d["J"],
                   worst_point=None if wp is None else tuple(wp), label=d.get("label", BOUND_LABEL))


def _discrepancy(P, ref: ReferenceSet, values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if ref.count == 0:
        raise GeometryError("empty reference set")
    if values.shape != (ref.count,):
        raise GeometryError(f"expected {ref.count} reference values, got {values.shape}")
    return np.abs(values - P.evaluate(ref.points))


def e_max(P, ref_values) -> float:
    """max_j |H_R(q_j) - P_N(q_j)| over the reference set; ref_values is (ReferenceSet, values)."""
    ref, values = ref_values
    return float(np.max(_discrepancy(P, ref, values)))


def error_bound(e: float, J: int = 0, worst_point=None) -> ErrorReport:
    if not e >= 0.0:
        raise GeometryError(f"E_max must be non-negative, got {e}")
    return ErrorReport(e_max=float(e), e_r=2.0 * float(e), J=J,
                       worst_point=None if worst_point is None else tuple(float(c) for c in worst_point))


def assess(P, ref: ReferenceSet, values) -> ErrorReport:
    """E_max with its worst reference point, wrapped into the report."""
    diff = _discrepancy(P, ref, values)
    j = int(np.argmax(diff))
    report = error_bound(float(diff[j]), ref.count, ref.points[j])
    logger.info("E_max=%.3e at %s, E_R=%.3e (%s)", report.e_max, report.worst_point, report.e_r, report.label)
    return report


def interior_grid(n: int = 21) -> np.ndarray:
    """Nodes of the uniform n^3 grid on [0,1]^3 that are strictly inside the cube."""
    g = np.linspace(0.0, 1.0, n)[1:-1]
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])


def closed_grid(n: int = 21) -> np.ndarray:
    g = np.linspace(0.0, 1.0, n)
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])


def observation_check(P, target, ref: ReferenceSet | None = None, grid: int = 21):
    """
    (max interior error of P against `target`, 2 E_max) for a synthetic harmonic target.

    `target` is a named closed-form target or a callable on cube coordinates; reference
    values are its exact trace.
    """
    fn = harmonic_target(target) if isinstance(target, str) else target
    if ref is None:
        ref = midpoint_reference(uniform_collocation(_n_from_params(P)))
    report = assess(P, ref, fn(ref.points))
    pts = interior_grid(grid)
    interior = float(np.max(np.abs(P.evaluate(pts) - fn(pts))))
    logger.info("observation check: interior %.3e vs 2*E_max %.3e", interior, report.e_r)
    return interior, report.e_r


def _n_from_params(P) -> int:
    N = P.params.get("N")
    n = int(round(np.sqrt((N or 0) / 6)))
    if N is None or 6 * n * n != N:
        raise GeometryError("cannot infer the collocation grid from the approximant; pass ref explicitly")
    return n
