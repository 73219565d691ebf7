"""
Regular phase: harmonic approximants P_N of H_R built from boundary residuals.

- MFS: point sources p_j = alpha (x_j - c) + c outside the cube, square interpolation by LU.
- POLY: real regular solid harmonics about the cube center up to degree L, least squares.
- CHEB: tensor Chebyshev-Gauss-Lobatto collocation of the Laplace equation, solved by fast
  diagonalization of the 1D second-derivative block.
"""

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import dgecon

from .errors import GeometryError, SolveError
from .geometry import CENTER, FACES, CollocationSet, Face, cheb_nodes

logger = logging.getLogger(__name__)

# ===== Config =====
PIVOT_FLOOR = 1e-300
TSVD_RTOL = 1e-12
POLY_RANK_RTOL = 1e-13   # cube symmetry leaves some (n, degree) pairs exactly rank deficient
MAX_N_CHEB = 24
FOUR_PI = 4.0 * math.pi
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class ResidualData:
    collocation: CollocationSet
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.collocation.count,):
            raise GeometryError(f"expected {self.collocation.count} residual values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise SolveError("residual data contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def points(self) -> np.ndarray:
        return self.collocation.points


@dataclass
class SolveDiagnostics:
    backend: str
    N: int
    condition: float
    residual: float
    method: str = "svd"
    tsvd: bool = False
    rank: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"backend": self.backend, "N": self.N, "condition": self.condition,
               "residual": self.residual, "condition_method": self.method, "tsvd": self.tsvd}
        if self.rank is not None:
            out["rank"] = self.rank
        out.update(self.extra)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SolveDiagnostics":
        d = dict(d)
        known = {k: d.pop(k) for k in ("backend", "N", "condition", "residual") if k in d}
        method = d.pop("condition_method", "svd")
        tsvd = d.pop("tsvd", False)
        rank = d.pop("rank", None)
        return cls(**known, method=method, tsvd=tsvd, rank=rank, extra=d)


@dataclass(eq=False)
class HarmonicApproximant:
    backend: str                        # "mfs" | "poly" | "cheb"
    params: dict
    coeffs: np.ndarray | None = None    # MFS source strengths or POLY coefficients
    sources: np.ndarray | None = None   # MFS only, (N, 3)
    grid: np.ndarray | None = None      # CHEB only, (n_c+1,)*3 values at CGL nodes

    def evaluate(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.backend == "mfs":
            r = np.linalg.norm(pts[:, None, :] - self.sources[None, :, :], axis=-1)
            return (1.0 / (FOUR_PI * r)) @ self.coeffs
        if self.backend == "poly":
            return solid_harmonics(pts - CENTER, self.params["degree"]) @ self.coeffs
        if self.backend == "cheb":
            return _cheb_interpolate(self.grid, pts)
        raise GeometryError(f"unknown backend {self.backend!r}")

    def __call__(self, points):
        return self.evaluate(points)


def eval_approximant(P: HarmonicApproximant, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,) or np.any(x < 0.0) or np.any(x > 1.0):
        raise GeometryError(f"approximant evaluated outside the closed cube at {tuple(np.ravel(x))}")
    return float(P.evaluate(x[None, :])[0])


# --- linear algebra helpers ---
def _condition(A: np.ndarray, method: str, lu=None) -> float:
    if method == "svd":
        return float(np.linalg.cond(A))
    if method == "estimate":
        anorm = np.linalg.norm(A, 1)
        rcond, info = dgecon(lu, anorm, norm="1")
        return float("inf") if rcond == 0.0 else float(1.0 / rcond)
    raise GeometryError(f"unknown condition method {method!r}")


def _tsvd_solve(A: np.ndarray, b: np.ndarray):
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    keep = s > TSVD_RTOL * s[0]
    coeffs = Vt[keep].T @ ((U[:, keep].T @ b) / s[keep])
    return coeffs, int(np.count_nonzero(keep)), float(s[0] / s[-1]) if s[-1] > 0 else float("inf")


# --- MFS ---
def mfs_sources(colloc: CollocationSet, alpha: float) -> np.ndarray:
    if not alpha > 1.0:
        raise GeometryError(f"MFS scaling alpha must exceed 1, got {alpha}")
    return alpha * (colloc.points - CENTER) + CENTER


def mfs_matrix(points: np.ndarray, sources: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(points[:, None, :] - sources[None, :, :], axis=-1)
    return 1.0 / (FOUR_PI * r)


def build_mfs(data: ResidualData, alpha: float = 3.0, *, condition: str = "svd",
              tsvd: bool = False):
    sources = mfs_sources(data.collocation, alpha)
    A = mfs_matrix(data.points, sources)
    b = data.values
    N = b.size

    if tsvd:
        coeffs, rank, cond = _tsvd_solve(A, b)
        if rank < N:
            logger.warning("MFS: truncated SVD kept %d of %d singular values", rank, N)
        diag = SolveDiagnostics("mfs", N, cond, 0.0, method="svd", tsvd=True, rank=rank,
                                extra={"alpha": alpha})
    else:
        lu, piv = sla.lu_factor(A, check_finite=True)
        pivot = float(np.min(np.abs(np.diag(lu))))
        if pivot < PIVOT_FLOOR:
            diag = SolveDiagnostics("mfs", N, float("inf"), float("nan"), extra={"alpha": alpha, "pivot": pivot})
            raise SolveError(f"MFS matrix numerically singular (smallest pivot {pivot:.3g})", diag)
        coeffs = sla.lu_solve((lu, piv), b)
        diag = SolveDiagnostics("mfs", N, _condition(A, condition, lu), 0.0, method=condition,
                                extra={"alpha": alpha})

    diag.residual = float(np.max(np.abs(A @ coeffs - b))) if N else 0.0
    logger.info("MFS: N=%d alpha=%g cond=%.3e residual=%.3e", N, alpha, diag.condition, diag.residual)
    P = HarmonicApproximant("mfs", {"alpha": float(alpha), "N": N}, coeffs=coeffs, sources=sources)
    return P, diag


# --- Solid harmonics ---
def solid_harmonics(X: np.ndarray, degree: int) -> np.ndarray:
    """
    Real regular solid harmonics R^c_lm (m = 0..l) and R^s_lm (m = 1..l), l <= degree.

    Columns ordered by l, then R^c_l0, R^c_l1, R^s_l1, ..., R^c_ll, R^s_ll; (degree+1)^2 of them.
    """
    X = np.atleast_2d(X)
    x, y, z = X[:, 0], X[:, 1], X[:, 2]
    r2 = x * x + y * y + z * z
    L = degree
    Rc = {}
    Rs = {}
    mmc, mms = np.ones_like(x), np.zeros_like(x)
    for m in range(L + 1):
        if m > 0:
            mmc, mms = -(x * mmc - y * mms) / (2 * m), -(y * mmc + x * mms) / (2 * m)
        Rc[m, m], Rs[m, m] = mmc, mms
        if m + 1 <= L:
            Rc[m + 1, m], Rs[m + 1, m] = z * mmc, z * mms
        for l in range(m + 2, L + 1):
            k = (l + m) * (l - m)
            Rc[l, m] = ((2 * l - 1) * z * Rc[l - 1, m] - r2 * Rc[l - 2, m]) / k
            Rs[l, m] = ((2 * l - 1) * z * Rs[l - 1, m] - r2 * Rs[l - 2, m]) / k

    cols = []
    for l in range(L + 1):
        cols.append(Rc[l, 0])
        for m in range(1, l + 1):
            cols.append(Rc[l, m])
            cols.append(Rs[l, m])
    return np.column_stack(cols)


def build_poly(data: ResidualData, degree: int = 11, *, tsvd: bool = False):
    N = data.values.size
    n_coef = (degree + 1) ** 2
    if degree < 0 or n_coef > N:
        raise SolveError(f"degree {degree} needs {n_coef} coefficients but only {N} data values")
    B = solid_harmonics(data.points - CENTER, degree)
    scale = np.linalg.norm(B, axis=0)
    scale[scale == 0.0] = 1.0
    Bs = B / scale
    driver = "gelsd" if tsvd else "gelsy"
    cond = TSVD_RTOL if tsvd else POLY_RANK_RTOL
    coeffs_s, _, rank, _ = sla.lstsq(Bs, data.values, cond=cond, lapack_driver=driver)
    coeffs = coeffs_s / scale
    if rank < n_coef:
        logger.info("POLY: numerical rank %d of %d basis functions", rank, n_coef)
    residual = float(np.max(np.abs(B @ coeffs - data.values)))
    # condition of the fit actually solved: sigma_max over the smallest retained singular value
    sigma = np.linalg.svd(B, compute_uv=False)
    effective = float(sigma[0] / sigma[max(int(rank), 1) - 1])
    diag = SolveDiagnostics("poly", N, effective, residual, method="svd", tsvd=tsvd,
                            rank=int(rank), extra={"degree": degree,
                                                    "full_condition": float(np.linalg.cond(B)),
                                                    "scaled_condition": float(np.linalg.cond(Bs))})
    logger.info("POLY: N=%d degree=%d cond=%.3e residual=%.3e", N, degree, diag.condition, residual)
    P = HarmonicApproximant("poly", {"degree": int(degree), "N": N}, coeffs=coeffs)
    return P, diag


# --- Chebyshev ---
def cheb_diff(n_c: int):
    """CGL nodes on [0,1] and the first-derivative matrix there (negative-sum diagonal)."""
    k = np.arange(n_c + 1)
    t = np.cos(np.pi * k / n_c)
    c = np.hstack((2.0, np.ones(n_c - 1), 2.0)) * (-1.0) ** k
    dT = t[:, None] - t[None, :]
    D = np.outer(c, 1.0 / c) / (dT + np.eye(n_c + 1))
    D = D - np.diag(D.sum(axis=1))
    return 0.5 * (1.0 + t), 2.0 * D


def _bary_weights(n_c: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n_c + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _bary_matrix(nodes: np.ndarray, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rows of Lagrange basis values at x (exact nodes give unit rows)."""
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        q = w / diff
        L = q / q.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    L[hit] = exact[hit].astype(float)
    return L


def _cheb_interpolate(grid: np.ndarray, pts: np.ndarray) -> np.ndarray:
    n_c = grid.shape[0] - 1
    nodes = cheb_nodes(n_c)
    w = _bary_weights(n_c)
    Lx = _bary_matrix(nodes, w, pts[:, 0])
    Ly = _bary_matrix(nodes, w, pts[:, 1])
    Lz = _bary_matrix(nodes, w, pts[:, 2])
    return np.einsum("mi,mj,mk,ijk->m", Lx, Ly, Lz, grid, optimize=True)


def _face_slice(face: Face, n_c: int):
    idx = [slice(None)] * 3
    idx[face.axis] = 0 if face.side == 1 else n_c    # node 0 sits at coordinate 1
    return tuple(idx)


def _laplacian(U: np.ndarray, D2: np.ndarray) -> np.ndarray:
    return (np.einsum("ia,ajk->ijk", D2, U) + np.einsum("ja,iak->ijk", D2, U)
            + np.einsum("ka,ija->ijk", D2, U))


def build_cheb(face_values: dict, n_c: int):
    """
    Laplace collocation on the (n_c+1)^3 CGL grid with Dirichlet values from six face grids.

    face_values maps Face -> (n_c+1, n_c+1) array indexed like geometry.cheb_face_grid.
    Nodes shared by several faces take the mean of the supplied values.
    """
    if not (2 <= n_c <= MAX_N_CHEB):
        raise GeometryError(f"n_c must be in [2, {MAX_N_CHEB}], got {n_c}")
    U = np.zeros((n_c + 1,) * 3)
    hits = np.zeros_like(U)
    for face in FACES:
        if face not in face_values:
            raise GeometryError(f"missing boundary grid for face {face.label}")
        g = np.asarray(face_values[face], dtype=float)
        if g.shape != (n_c + 1, n_c + 1) or not np.all(np.isfinite(g)):
            raise GeometryError(f"face {face.label} grid must be finite with shape {(n_c + 1, n_c + 1)}")
        sl = _face_slice(face, n_c)
        U[sl] += g
        hits[sl] += 1.0
    boundary = hits > 0
    U[boundary] /= hits[boundary]

    _, D = cheb_diff(n_c)
    D2 = D @ D
    inner = slice(1, n_c)
    A = D2[inner, inner]
    lam, V = np.linalg.eig(A)
    if np.max(np.abs(lam.imag)) > 1e-8 * np.max(np.abs(lam)):
        raise SolveError("Chebyshev second-derivative block has complex spectrum")
    lam, V = lam.real, V.real
    Vinv = np.linalg.inv(V)
    denom = lam[:, None, None] + lam[None, :, None] + lam[None, None, :]
    if np.min(np.abs(denom)) == 0.0:
        raise SolveError("singular Chebyshev collocation system")

    F = -_laplacian(U, D2)[inner, inner, inner]
    Fh = np.einsum("ia,jb,kc,abc->ijk", Vinv, Vinv, Vinv, F, optimize=True)
    W = np.einsum("ia,jb,kc,abc->ijk", V, V, V, Fh / denom, optimize=True)
    U[inner, inner, inner] = W

    residual = float(np.max(np.abs(_laplacian(U, D2)[inner, inner, inner]))) if n_c > 1 else 0.0
    cond = float(np.max(np.abs(denom)) / np.min(np.abs(denom)))
    diag = SolveDiagnostics("cheb", int(boundary.sum()), cond, residual, method="eigen",
                            extra={"n_cheb": n_c, "eigvec_condition": float(np.linalg.cond(V))})
    logger.info("CHEB: n_c=%d cond=%.3e interior residual=%.3e", n_c, cond, residual)
    return HarmonicApproximant("cheb", {"n_cheb": int(n_c)}, grid=U), diag


def _extrapolation_matrix(n_c: int) -> np.ndarray:
    """(n_c+1, n_c-1) map from interior CGL values to all CGL nodes (polynomial through the interior)."""
    nodes = cheb_nodes(n_c)
    inner = nodes[1:-1]
    diff = inner[:, None] - inner[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / diff.prod(axis=1)
    E = _bary_matrix(inner, w, nodes)
    E[1:-1] = np.eye(n_c - 1)
    return E


def cheb_extrapolate_edges(face_interior_values: dict, n_c: int) -> dict:
    """Fill edge and corner CGL nodes of each face from its (n_c-1)^2 interior values."""
    if n_c < 3:
        raise GeometryError(f"edge extrapolation needs n_c >= 3, got {n_c}")
    E = _extrapolation_matrix(n_c)
    out = {}
    for face, vals in face_interior_values.items():
        vals = np.asarray(vals, dtype=float)
        if vals.shape != (n_c - 1, n_c - 1):
            raise GeometryError(f"face {face.label} interior grid must have shape {(n_c - 1, n_c - 1)}")
        out[face] = E @ vals @ E.T
    return out


# --- serialization ---
def approximant_lines(P: HarmonicApproximant) -> list:
    lines = [f"APPROXIMANT {P.backend.upper()} {FORMAT_VERSION}", json.dumps(P.params, sort_keys=True)]
    if P.backend == "mfs":
        rows = np.column_stack([P.sources, P.coeffs])
        lines.append(str(len(rows)))
        lines.extend(" ".join("%.17g" % v for v in row) for row in rows)
    elif P.backend == "poly":
        lines.append(str(P.coeffs.size))
        lines.extend("%.17g" % v for v in P.coeffs)
    else:
        flat = P.grid.ravel()
        lines.append(str(flat.size))
        lines.extend("%.17g" % v for v in flat)
    lines.append("END")
    return lines


def approximant_from_lines(lines: list) -> HarmonicApproximant:
    head = lines[0].split()
    if len(head) != 3 or head[0] != "APPROXIMANT" or int(head[2]) != FORMAT_VERSION:
        raise SolveError(f"unrecognized approximant header {lines[0]!r}")
    backend = head[1].lower()
    params = json.loads(lines[1])
    count = int(lines[2])
    body = lines[3:3 + count]
    if len(body) != count or lines[3 + count].strip() != "END":
        raise SolveError("truncated approximant block")
    if backend == "mfs":
        rows = np.array([[float(v) for v in line.split()] for line in body]).reshape(count, 4)
        return HarmonicApproximant("mfs", params, coeffs=rows[:, 3].copy(), sources=rows[:, :3].copy())
    values = np.array([float(v) for v in body])
    if backend == "poly":
        return HarmonicApproximant("poly", params, coeffs=values)
    if backend == "cheb":
        n = params["n_cheb"] + 1
        return HarmonicApproximant("cheb", params, grid=values.reshape(n, n, n))
    raise SolveError(f"unknown backend {backend!r} in approximant block")
