"""
Closed-form kernels for the cube and the cylinder.

- phi: free-space fundamental solution 1/(4 pi r).
- Half-space Poisson kernel (1/2pi normalization; integrates to 1 over the plane).
- The 27 signed images of a source under reflection in the cube faces, the singular
  part S(x,y) built from them and its normal derivative in y.
- Infinite-cylinder Green's function as a Bessel mode sum, and the three-term
  finite-cylinder singular part.

Sign convention: Delta_y G = -delta and outward normals, so u(x) = -int dG/dn_y f ds_y.
`poisson_kernel_dS` returns the positive kernel -dS/dn_y.
"""

import logging
import math
from dataclasses import dataclass
from itertools import product
from typing import NamedTuple

import numpy as np

from .bessel import _bessel_j_unchecked, bessel_j, bessel_zero, bessel_zeros  # noqa: F401
from .errors import GeometryError, SingularityError, TruncationError
from .geometry import Face, Point3

logger = logging.getLogger(__name__)

# ===== Config =====
FOUR_PI = 4.0 * math.pi
SINGULAR_TOL = 1e-14
CYLINDER_MIN_DZ = 1e-3
CYLINDER_MAX_ORDER = 50
CYLINDER_MAX_INDEX = 100

# Per-axis choice r in {0,1,2}: y_c, -y_c, 2-y_c. Rows sorted by image index.
IMAGE_INDEX = np.array(list(product(range(3), repeat=3)))          # (27, 3)
IMAGE_SIGMA = np.where(IMAGE_INDEX == 0, 1.0, -1.0)                # d p_c / d y_c
IMAGE_SHIFT = np.where(IMAGE_INDEX == 2, 2.0, 0.0)
IMAGE_WEIGHT = (-1.0) ** np.count_nonzero(IMAGE_INDEX, axis=1)      # (27,)


class ImageSource(NamedTuple):
    location: Point3
    weight: int
    index: tuple


@dataclass(frozen=True, eq=False)
class ImageSet:
    source: Point3
    images: tuple

    @property
    def locations(self) -> np.ndarray:
        return np.array([img.location for img in self.images])

    @property
    def weights(self) -> np.ndarray:
        return np.array([img.weight for img in self.images], dtype=float)

    def __len__(self):
        return len(self.images)


class CylinderPoint(NamedTuple):
    r: float
    theta: float
    z: float


def phi(distance: float) -> float:
    if not distance > 0.0:
        raise SingularityError(f"fundamental solution evaluated at distance {distance}")
    return 1.0 / (FOUR_PI * distance)


def halfspace_poisson(xp, yp, y3: float) -> float:
    """y3 / (2 pi (|xp - yp|^2 + y3^2)^(3/2))."""
    if not y3 > 0.0:
        raise GeometryError(f"half-space height must be positive, got {y3}")
    dx = np.asarray(xp, dtype=float) - np.asarray(yp, dtype=float)
    return float(y3 / (2.0 * math.pi * (dx @ dx + y3 * y3) ** 1.5))


def image_locations(y) -> np.ndarray:
    """(..., 27, 3) image locations for source points y of shape (..., 3)."""
    y = np.asarray(y, dtype=float)
    return IMAGE_SIGMA * y[..., None, :] + IMAGE_SHIFT


def cube_images(y) -> ImageSet:
    y = np.asarray(y, dtype=float)
    if y.shape != (3,) or np.any(y < 0.0) or np.any(y > 1.0):
        raise GeometryError(f"image source {tuple(y)} outside the closed unit cube")
    locs = image_locations(y)
    images = tuple(
        ImageSource(Point3(*loc.tolist()), int(w), tuple(int(r) for r in idx))
        for loc, w, idx in zip(locs, IMAGE_WEIGHT, IMAGE_INDEX)
    )
    return ImageSet(source=Point3(*y.tolist()), images=images)


def cube_lattice_images(y, shells: int = 1) -> list:
    """
    Images of the full reflection lattice with per-axis shifts |k| <= shells.

    Per axis the coordinates are 2k + y_c (sign +1) and 2k - y_c (sign -1); the weight is the
    product of the per-axis signs. `index` holds (k, reflected) per axis.
    """
    y = np.asarray(y, dtype=float)
    axis_choices = []
    for c in range(3):
        choices = []
        for k in range(-shells, shells + 1):
            choices.append((2.0 * k + y[c], 1, (k, 0)))
            choices.append((2.0 * k - y[c], -1, (k, 1)))
        axis_choices.append(choices)
    out = []
    for cx, cy, cz in product(*axis_choices):
        out.append(ImageSource(Point3(cx[0], cy[0], cz[0]), cx[1] * cy[1] * cz[1], (cx[2], cy[2], cz[2])))
    return out


def cube_S(x, y) -> float:
    """Singular part S(x,y): signed sum of phi over the 27 images of y."""
    x = np.asarray(x, dtype=float)
    locs = image_locations(y)
    r = np.sqrt(np.sum((x - locs) ** 2, axis=-1))
    if np.min(r) < SINGULAR_TOL:
        j = int(np.argmin(r))
        raise SingularityError(f"x={tuple(x)} coincides with image {tuple(IMAGE_INDEX[j])} of y")
    return float(np.dot(IMAGE_WEIGHT, 1.0 / (FOUR_PI * r)))


def dSdn_on_face(x, face: Face, s, t) -> np.ndarray:
    """
    dS/dn_y (x, y(s,t)) for arrays s, t on one face; x a single point.

    Terms whose normal-axis separation is exactly zero contribute 0 (x on the face plane of
    a coincident image pair).
    """
    x = np.asarray(x, dtype=float)
    y = face.points(s, t)
    diff = x - image_locations(y)                      # (..., 27, 3)
    r2 = np.sum(diff * diff, axis=-1)
    num = diff[..., face.axis]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(num == 0.0, 0.0, num / (r2 * np.sqrt(r2)))
    coef = IMAGE_WEIGHT * IMAGE_SIGMA[:, face.axis]
    return face.sign * (terms @ coef) / FOUR_PI


def representation_kernel(x, face: Face):
    """(s, t) -> -dS/dn_y(x, y(s,t)): the positive kernel integrated against f on `face`."""
    def kernel(s, t):
        return -dSdn_on_face(x, face, s, t)
    return kernel


def _check_face_params(s, t):
    if not (0.0 <= s <= 1.0 and 0.0 <= t <= 1.0):
        raise GeometryError(f"face parameters ({s}, {t}) outside [0,1]^2")


def cube_dSdn(x, y_face: Face, s: float, t: float) -> float:
    _check_face_params(s, t)
    x = np.asarray(x, dtype=float)
    locs = image_locations(y_face.points(s, t))
    if np.min(np.sqrt(np.sum((x - locs) ** 2, axis=-1))) < SINGULAR_TOL:
        raise SingularityError(f"x={tuple(x)} coincides with an image of face point ({s}, {t})")
    return float(dSdn_on_face(x, y_face, s, t))


def poisson_kernel_dS(x, face: Face, s: float, t: float) -> float:
    return -cube_dSdn(x, face, s, t)


# --- Cylinder ---
def _mode_bound_factor(n: int) -> float:
    # 1/(alpha J_{n+1}(alpha)^2) over the zeros of J_n stays below this.
    return 2.0 * n ** (1.0 / 3.0) + 2.0


def cylinder_G0(x: CylinderPoint, y: CylinderPoint, tol: float = 1e-10) -> float:
    """
    Dirichlet Green's function of the infinite unit cylinder,

        (1/2pi) sum_n eps_n cos(n dtheta) sum_m J_n(a r) J_n(a r') exp(-a |dz|) / (a J_{n+1}(a)^2),

    a = alpha_{n,m}, eps_0 = 1, eps_n = 2. Both sums stop on geometric tail bounds below tol.
    """
    if not tol > 0.0:
        raise GeometryError(f"tolerance must be positive, got {tol}")
    if not (0.0 <= x.r <= 1.0) or not (0.0 <= y.r <= 1.0):
        raise GeometryError(f"cylinder radii must lie in [0,1], got {x.r}, {y.r}")
    dz = abs(x.z - y.z)
    if dz < CYLINDER_MIN_DZ:
        raise TruncationError(f"axial separation {dz:.3g} below {CYLINDER_MIN_DZ}; mode sum not controlled")

    dtheta = x.theta - y.theta
    q = math.exp(-dz)
    m_gap = 1.0 - math.exp(-3.0 * dz)
    total = 0.0
    for n in range(CYLINDER_MAX_ORDER + 1):
        eps = 1.0 if n == 0 else 2.0
        c = math.cos(n * dtheta)
        mode = 0.0
        converged = False
        for count in (16, 32, 64, CYLINDER_MAX_INDEX):
            alphas = bessel_zeros(n, count)
            jn1 = _bessel_j_unchecked(n + 1, alphas)
            coef = np.exp(-alphas * dz) / (alphas * jn1 * jn1)
            terms = _bessel_j_unchecked(n, alphas * x.r) * _bessel_j_unchecked(n, alphas * y.r) * coef
            # tail after m: 2 * coef_m * exp(-(alpha_{m+1} - alpha_m) dz) / (1 - e^{-3 dz})
            tails = 2.0 * coef / m_gap
            ok = np.flatnonzero(eps * tails / (2.0 * math.pi) < 0.25 * tol)
            if ok.size:
                m = int(ok[0]) + 1
                mode = float(np.sum(terms[:m]))
                converged = True
                break
        if not converged:
            raise TruncationError(f"mode n={n} needs more than {CYLINDER_MAX_INDEX} zeros at dz={dz:.3g}")
        total += eps * c * mode

        a_next = bessel_zeros(n + 1, 1)[0]
        rest = _mode_bound_factor(n + 1) * math.exp(-a_next * dz) / ((1.0 - q) * m_gap) / math.pi
        if rest < 0.25 * tol:
            logger.debug("cylinder_G0 dz=%.3g: %d orders", dz, n + 1)
            return total / (2.0 * math.pi)
    raise TruncationError(f"order sum needs more than {CYLINDER_MAX_ORDER} orders at dz={dz:.3g}")


def cylinder_S3(x: CylinderPoint, y: CylinderPoint, tol: float = 1e-10) -> float:
    """G0(x;y) - G0(x; y at -z') - G0(x; y at 2-z')."""
    part = tol / 3.0
    below = CylinderPoint(y.r, y.theta, -y.z)
    above = CylinderPoint(y.r, y.theta, 2.0 - y.z)
    return cylinder_G0(x, y, part) - cylinder_G0(x, below, part) - cylinder_G0(x, above, part)
