"""
Cube boundary representation for Omega = [0,1]^3.

- Six faces in a fixed order (x=0, x=1, y=0, y=1, z=0, z=1); each maps (s,t) in [0,1]^2
  onto the face with s, t the two remaining coordinates in increasing axis order.
- Collocation points (uniform or tensor Gauss), reference points for the error estimate,
  Chebyshev-Gauss-Lobatto face nodes for the spectral backend.
- Dirichlet data per face: piecewise constant or the trace of a closed-form harmonic function.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .errors import GeometryError

logger = logging.getLogger(__name__)

# ===== Config =====
CENTER = np.array([0.5, 0.5, 0.5])
ON_FACE_TOL = 1e-12     # |coord - 0 or 1| below this counts as "on the face plane"


class Point3(NamedTuple):
    x: float
    y: float
    z: float


class Face(Enum):
    X0 = (0, 0)
    X1 = (0, 1)
    Y0 = (1, 0)
    Y1 = (1, 1)
    Z0 = (2, 0)
    Z1 = (2, 1)

    @property
    def axis(self) -> int:
        return self.value[0]

    @property
    def side(self) -> int:
        return self.value[1]

    @property
    def sign(self) -> float:
        """Sign of the outward normal along `axis`."""
        return 1.0 if self.side == 1 else -1.0

    @property
    def normal(self) -> np.ndarray:
        n = np.zeros(3)
        n[self.axis] = self.sign
        return n

    @property
    def param_axes(self) -> tuple[int, int]:
        return tuple(a for a in range(3) if a != self.axis)

    @property
    def label(self) -> str:
        return "xyz"[self.axis] + str(self.side)

    def points(self, s, t) -> np.ndarray:
        """Vectorized parametrization; returns an array of shape s.shape + (3,)."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        s, t = np.broadcast_arrays(s, t)
        out = np.empty(s.shape + (3,))
        out[..., self.axis] = float(self.side)
        a, b = self.param_axes
        out[..., a] = s
        out[..., b] = t
        return out

    def params(self, p) -> tuple[float, float]:
        """Face parameters (s,t) of the orthogonal projection of p onto the face plane."""
        a, b = self.param_axes
        return float(p[a]), float(p[b])

    def plane_distance(self, p) -> float:
        return abs(float(p[self.axis]) - self.side)


FACES = tuple(Face)
FACE_BY_LABEL = {f.label: f for f in FACES}


def face_point(face: Face, s: float, t: float) -> Point3:
    if not (0.0 <= s <= 1.0 and 0.0 <= t <= 1.0):
        raise GeometryError(f"face parameters ({s}, {t}) outside [0,1]^2")
    return Point3(*face.points(s, t).tolist())


def face_of(p) -> Face:
    """The single open face containing p; edges, vertices and off-boundary points are rejected."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -ON_FACE_TOL) or np.any(p > 1 + ON_FACE_TOL):
        raise GeometryError(f"point {tuple(p)} is outside the closed cube")
    hits = [f for f in FACES if abs(p[f.axis] - f.side) <= ON_FACE_TOL]
    if not hits:
        raise GeometryError(f"point {tuple(p)} is not on the boundary")
    if len(hits) > 1:
        raise GeometryError(f"point {tuple(p)} lies on an edge or vertex ({', '.join(f.label for f in hits)})")
    return hits[0]


def is_strictly_interior(p, margin: float = 0.0) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(np.all(p > margin) and np.all(p < 1.0 - margin))


def boundary_distance(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(min(p.min(), (1.0 - p).min()))


# --- Point sets ---
@dataclass(frozen=True)
class CollocationSet:
    points: np.ndarray          # (N, 3)
    faces: tuple                # Face per point
    n: int
    placement: str = "uniform"

    @property
    def count(self) -> int:
        return len(self.faces)

    def __len__(self):
        return self.count


@dataclass(frozen=True)
class ReferenceSet:
    points: np.ndarray
    faces: tuple
    n: int

    @property
    def count(self) -> int:
        return len(self.faces)

    def __len__(self):
        return self.count


def _tensor_face_points(nodes: np.ndarray):
    """All faces in FACES order, then row-major over (i, j) of the 1D node list."""
    s, t = np.meshgrid(nodes, nodes, indexing="ij")
    s, t = s.ravel(), t.ravel()
    points, faces = [], []
    for face in FACES:
        points.append(face.points(s, t))
        faces.extend([face] * s.size)
    return np.vstack(points), tuple(faces)


def uniform_collocation(n: int) -> CollocationSet:
    if n < 1:
        raise GeometryError(f"n must be a positive integer, got {n}")
    nodes = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    points, faces = _tensor_face_points(nodes)
    return CollocationSet(points=points, faces=faces, n=n, placement="uniform")


def gauss_collocation(n: int) -> CollocationSet:
    from .quadrature import gauss_legendre

    if n < 1:
        raise GeometryError(f"n must be a positive integer, got {n}")
    points, faces = _tensor_face_points(gauss_legendre(n).nodes)
    return CollocationSet(points=points, faces=faces, n=n, placement="gauss")


def collocation(n: int, placement: str = "uniform") -> CollocationSet:
    if placement == "uniform":
        return uniform_collocation(n)
    if placement == "gauss":
        return gauss_collocation(n)
    raise GeometryError(f"unknown collocation placement {placement!r}")


def midpoint_reference(colloc: CollocationSet) -> ReferenceSet:
    """
    Half-spacing mesh offset from the collocation grid: ((2k-1)/4n, (2l-1)/4n), k,l = 1..2n.

    J = 24 n^2; never meets a collocation point, for n = 1 these are the four midpoints
    between each face center and the face vertices.
    """
    if colloc.placement != "uniform":
        raise GeometryError("reference points are defined for uniform collocation only")
    n = colloc.n
    nodes = (2.0 * np.arange(1, 2 * n + 1) - 1.0) / (4.0 * n)
    points, faces = _tensor_face_points(nodes)
    return ReferenceSet(points=points, faces=faces, n=n)


def cheb_nodes(n_c: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto nodes mapped to [0,1], x_i = (1 + cos(i pi / n_c)) / 2."""
    return 0.5 * (1.0 + np.cos(np.pi * np.arange(n_c + 1) / n_c))


def cheb_face_grid(face: Face, n_c: int) -> np.ndarray:
    """(n_c+1, n_c+1, 3) CGL grid on one face, indexed [i, j] -> (s_i, t_j)."""
    x = cheb_nodes(n_c)
    s, t = np.meshgrid(x, x, indexing="ij")
    return face.points(s, t)


def cheb_face_nodes(n_c: int) -> dict:
    if n_c < 2:
        raise GeometryError(f"n_c must be at least 2, got {n_c}")
    return {face: cheb_face_grid(face, n_c) for face in FACES}


# --- Closed-form harmonic targets (centered cube coordinates) ---
def _u1(xc):
    return np.cos(0.6 * xc[..., 0]) * np.sin(0.8 * xc[..., 1]) * np.exp(xc[..., 2])


def _u2(xc):
    return 1.0 / np.sqrt(xc[..., 0] ** 2 + xc[..., 1] ** 2 + (xc[..., 2] - 1.6) ** 2)


def _one(xc):
    return np.ones(xc.shape[:-1])


HARMONIC_TARGETS: dict[str, Callable] = {"u1": _u1, "u2": _u2, "one": _one}


def harmonic_target(name: str, centered: bool = True) -> Callable[[np.ndarray], np.ndarray]:
    """
    Callable on cube coordinates (..., 3).

    The formulas are written about the cube center; centered=False applies them to the raw
    coordinates instead (u1 on z=1 then reads cos(0.6x) sin(0.8y) e).
    """
    try:
        fn = HARMONIC_TARGETS[name]
    except KeyError:
        raise GeometryError(f"unknown harmonic target {name!r}") from None
    origin = CENTER if centered else np.zeros(3)

    def target(p):
        return fn(np.asarray(p, dtype=float) - origin)

    target.__name__ = name
    return target


# --- Boundary data ---
class BoundaryData:
    """
    Dirichlet data f(face, s, t).

    kind "piecewise_constant": one value per face (missing faces are 0).
    kind "harmonic": trace of a named closed-form harmonic function, defined on edges too.
    """

    def __init__(self, kind: str, values: dict | None = None, name: str | None = None,
                 centered: bool = True):
        if kind == "piecewise_constant":
            values = dict(values or {})
            unknown = set(values) - set(FACE_BY_LABEL)
            if unknown:
                raise GeometryError(f"unknown face labels {sorted(unknown)}")
            self.values = {f.label: float(values.get(f.label, 0.0)) for f in FACES}
            self._target = None
        elif kind == "harmonic":
            self._target = harmonic_target(name, centered)
            self.values = None
        else:
            raise GeometryError(f"unknown boundary data kind {kind!r}")
        self.kind = kind
        self.name = name
        self.centered = bool(centered)

    @classmethod
    def piecewise_constant(cls, values: dict) -> "BoundaryData":
        return cls("piecewise_constant", values=values)

    @classmethod
    def harmonic(cls, name: str, centered: bool = True) -> "BoundaryData":
        return cls("harmonic", name=name, centered=centered)

    @classmethod
    def hot_face(cls, label: str = "z1", value: float = 1.0) -> "BoundaryData":
        return cls.piecewise_constant({label: value})

    @classmethod
    def from_descriptor(cls, desc: dict) -> "BoundaryData":
        kind = desc.get("kind")
        if kind == "piecewise_constant":
            return cls.piecewise_constant(desc.get("values", {}))
        if kind == "harmonic":
            return cls.harmonic(desc.get("name"), bool(desc.get("centered", True)))
        raise GeometryError(f"unknown boundary data kind {kind!r}")

    def describe(self) -> dict:
        if self.kind == "piecewise_constant":
            return {"kind": self.kind, "values": dict(self.values)}
        return {"kind": self.kind, "name": self.name, "centered": self.centered}

    @property
    def target(self):
        return self._target

    def is_zero_on(self, face: Face) -> bool:
        return self.kind == "piecewise_constant" and self.values[face.label] == 0.0

    def on_face(self, face: Face, s, t) -> np.ndarray:
        if self.kind == "piecewise_constant":
            s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
            return np.full(s.shape, self.values[face.label])
        return self._target(face.points(s, t))

    def __repr__(self):
        return f"BoundaryData({self.describe()})"


def boundary_value(data: BoundaryData, p) -> float:
    p = np.asarray(p, dtype=float)
    if data.kind == "piecewise_constant":
        return data.values[face_of(p).label]
    if np.any(p < -ON_FACE_TOL) or np.any(p > 1 + ON_FACE_TOL):
        raise GeometryError(f"point {tuple(p)} is outside the closed cube")
    if not np.any((np.abs(p) <= ON_FACE_TOL) | (np.abs(p - 1.0) <= ON_FACE_TOL)):
        raise GeometryError(f"point {tuple(p)} is not on the boundary")
    return float(data.target(p))


def boundary_values(data: BoundaryData, points, faces) -> np.ndarray:
    """Data at points already tagged with their face (collocation/reference sets)."""
    out = np.empty(len(faces))
    for i, (p, face) in enumerate(zip(points, faces)):
        s, t = face.params(p)
        out[i] = data.on_face(face, s, t)
    return out
