"""
Singular phase: H_S(x) = int_{dOmega} K(x,y) f(y) ds_y with K = -dS/dn_y.

Interior points use one distance-adaptive plan per face, peaked at the orthogonal
projection of x. On a face point the straddling image pair concentrates to the full
Poisson mass, so H_S(x_i) = f(x_i) + Q with Q the plain quadrature of the kernel at x_i
(the pair terms vanish identically there).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError
from .geometry import FACES, BoundaryData, boundary_distance, face_of, is_strictly_interior
from .kernels import representation_kernel
from .quadrature import integrate_face, near_singular_plan, single_patch_plan

logger = logging.getLogger(__name__)

DEFAULT_BASE_K = 16


@dataclass(frozen=True)
class SingularEval:
    value: float
    depths: dict = field(default_factory=dict)   # face label -> plan depth, -1 when skipped
    d: float = 0.0

    def __float__(self):
        return self.value


def _face_integral(x, face, data: BoundaryData, plan) -> float:
    kernel = representation_kernel(x, face)

    def integrand(s, t):
        return kernel(s, t) * data.on_face(face, s, t)

    return integrate_face(integrand, plan)


def hs_interior(x, data: BoundaryData, base_k: int = DEFAULT_BASE_K, *,
                telles: bool = False, rule: str = "gauss") -> SingularEval:
    x = np.asarray(x, dtype=float)
    if not is_strictly_interior(x):
        raise GeometryError(f"H_S interior evaluation needs a point strictly inside the cube, got {tuple(x)}")
    total = 0.0
    depths = {}
    for face in FACES:
        if data.is_zero_on(face):
            depths[face.label] = -1
            continue
        a, b = face.params(x)
        plan = near_singular_plan(a, b, face.plane_distance(x), base_k, telles=telles, rule=rule)
        depths[face.label] = plan.depth
        total += _face_integral(x, face, data, plan)
    return SingularEval(value=total, depths=depths, d=boundary_distance(x))


def hs_boundary(x_i, data: BoundaryData, base_k: int = DEFAULT_BASE_K, *, rule: str = "gauss") -> SingularEval:
    x_i = np.asarray(x_i, dtype=float)
    own = face_of(x_i)
    s, t = own.params(x_i)
    jump = float(data.on_face(own, s, t))
    plan = single_patch_plan(base_k, rule)
    q = 0.0
    depths = {}
    for face in FACES:
        if data.is_zero_on(face):
            depths[face.label] = -1
            continue
        depths[face.label] = 0
        q += _face_integral(x_i, face, data, plan)
    return SingularEval(value=jump + q, depths=depths, d=0.0)


def _batch(fn, points, threads: int) -> np.ndarray:
    points = [np.asarray(p, dtype=float) for p in points]
    if threads <= 1 or len(points) < 2:
        return np.array([fn(p).value for p in points])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array([ev.value for ev in pool.map(fn, points)])


def hs_interior_batch(points, data: BoundaryData, base_k: int = DEFAULT_BASE_K, *,
                      threads: int = 1, telles: bool = False, rule: str = "gauss") -> np.ndarray:
    """H_S at many interior points; output order follows input order."""
    return _batch(lambda p: hs_interior(p, data, base_k, telles=telles, rule=rule), points, threads)


def hs_boundary_batch(points, data: BoundaryData, base_k: int = DEFAULT_BASE_K, *,
                      threads: int = 1, rule: str = "gauss") -> np.ndarray:
    return _batch(lambda p: hs_boundary(p, data, base_k, rule=rule), points, threads)
