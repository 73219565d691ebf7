"""
Quadrature over the face parameter square [0,1]^2.

- Gauss-Legendre rules by Newton iteration on the three-term recurrence.
- Composite Simpson rules.
- Telles cubic transformation clustering nodes at a kernel peak (classic or distance-adaptive).
- Nested 3x3 tilings refined geometrically around a peak at height d above the face.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import GeometryError, QuadratureError

logger = logging.getLogger(__name__)

# ===== Config =====
MAX_GAUSS_POINTS = 64
NEWTON_TOL = 1e-15
NEWTON_MAX_ITER = 100
MAX_DEPTH = 12
FAR_FIELD_D = 0.5
FAR_FIELD_MIN_K = 16    # per-axis order floor when one patch spans the whole face


@dataclass(frozen=True, eq=False)
class Rule1D:
    nodes: np.ndarray
    weights: np.ndarray
    name: str = "gauss"

    def __len__(self):
        return self.nodes.size

    def on(self, lo: float, hi: float):
        """Nodes and weights affinely mapped to [lo, hi]."""
        h = hi - lo
        return lo + h * self.nodes, h * self.weights

    def integrate(self, fn) -> float:
        return float(np.dot(self.weights, fn(self.nodes)))


@dataclass(frozen=True, eq=False)
class Patch:
    s0: float
    s1: float
    t0: float
    t1: float
    rule_s: Rule1D
    rule_t: Rule1D
    peak: tuple | None = None

    @property
    def area(self) -> float:
        return (self.s1 - self.s0) * (self.t1 - self.t0)

    def tensor(self):
        """Flattened (s, t, w) arrays of the tensor-product rule, row-major in (s, t)."""
        s, ws = self.rule_s.on(self.s0, self.s1)
        t, wt = self.rule_t.on(self.t0, self.t1)
        S, T = np.meshgrid(s, t, indexing="ij")
        W = np.outer(ws, wt)
        return S.ravel(), T.ravel(), W.ravel()


@dataclass(frozen=True, eq=False)
class QuadraturePlan:
    patches: tuple
    a: float
    b: float
    d: float
    depth: int
    meta: dict = field(default_factory=dict)

    @property
    def total_area(self) -> float:
        return float(sum(p.area for p in self.patches))

    @property
    def central(self) -> Patch:
        return self.patches[-1]

    def __len__(self):
        return len(self.patches)


# --- 1D rules ---
def _legendre(k: int, x: np.ndarray):
    """P_k(x) and P_k'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, k + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    if k == 0:
        return p0, np.zeros_like(x)
    dp = k * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=None)
def _gauss_legendre_unit(k: int):
    i = np.arange(1, k + 1)
    x = np.cos(np.pi * (i - 0.25) / (k + 0.5))
    for _ in range(NEWTON_MAX_ITER):
        p, dp = _legendre(k, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < NEWTON_TOL:
            break
    _, dp = _legendre(k, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    nodes = 0.5 * (1.0 + x[order])
    weights = 0.5 * w[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(k: int) -> Rule1D:
    """k-point Gauss-Legendre rule on [0,1]."""
    if not (1 <= k <= MAX_GAUSS_POINTS):
        raise QuadratureError(f"Gauss order must be in [1, {MAX_GAUSS_POINTS}], got {k}")
    nodes, weights = _gauss_legendre_unit(int(k))
    return Rule1D(nodes=nodes, weights=weights, name=f"gauss{k}")


def composite_simpson(panels: int) -> Rule1D:
    """Composite Simpson rule on [0,1] with `panels` panels (2*panels + 1 nodes, endpoints included)."""
    if panels < 1:
        raise QuadratureError(f"Simpson needs at least one panel, got {panels}")
    m = 2 * panels
    h = 1.0 / m
    nodes = np.linspace(0.0, 1.0, m + 1)
    weights = np.full(m + 1, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    return Rule1D(nodes=nodes, weights=weights * h / 3.0, name=f"simpson{panels}")


def base_rule(kind: str, k: int) -> Rule1D:
    if kind == "gauss":
        return gauss_legendre(k)
    if kind == "simpson":
        return composite_simpson(max(1, k // 2))
    raise QuadratureError(f"unknown rule {kind!r}")


# --- Telles transformation ---
def telles_jacobian_at_peak(distance: float | None) -> float:
    """
    Jacobian r of the cubic map at the peak, as a function of the normalized distance D.

    None or D < 0.05 gives the classic transform (r = 0); the map is the identity from D ~ 3.6 on.
    """
    if distance is None or distance < 0.05:
        return 0.0
    if distance < 1.3:
        return 0.85 + 0.24 * np.log(distance)
    if distance < 3.618:
        return 0.893 + 0.0832 * np.log(distance)
    return 1.0


def _telles_inflection(eta: float, rbar: float) -> float:
    def f(g):
        u, v = 1.0 - g, 1.0 + g
        return (1.0 - eta - rbar * u) * v ** 3 - (1.0 + eta - rbar * v) * u ** 3

    return brentq(f, -1.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def telles_map(rule: Rule1D, peak: float, distance: float | None = None) -> Rule1D:
    """
    Cubic change of variables eta(g) = a (g - gbar)^3 + r (g - gbar) + etabar on [-1, 1].

    eta(gbar) = etabar is the peak; eta(+-1) = +-1; eta'(gbar) = r.
    `distance` is the peak height divided by the half-length of the interval.
    """
    if not (0.0 <= peak <= 1.0):
        raise GeometryError(f"Telles peak {peak} outside [0,1]")
    rbar = telles_jacobian_at_peak(distance)
    eta = 2.0 * peak - 1.0
    gbar = _telles_inflection(eta, rbar)
    u, v = 1.0 - gbar, 1.0 + gbar
    if u >= v:
        a = (1.0 - eta - rbar * u) / u ** 3
    else:
        a = (1.0 + eta - rbar * v) / v ** 3

    g = 2.0 * rule.nodes - 1.0
    dg = g - gbar
    mapped = a * dg ** 3 + rbar * dg + eta
    jac = 3.0 * a * dg ** 2 + rbar
    nodes = np.clip(0.5 * (1.0 + mapped), 0.0, 1.0)
    return Rule1D(nodes=nodes, weights=rule.weights * jac, name=f"telles({rule.name})")


# --- Face plans ---
def _single_patch_plan(a, b, d, rule, depth=0, meta=None) -> QuadraturePlan:
    patch = Patch(0.0, 1.0, 0.0, 1.0, rule, rule)
    return QuadraturePlan(patches=(patch,), a=a, b=b, d=d, depth=depth, meta=meta or {})


def single_patch_plan(base_k: int = 16, rule: str = "gauss") -> QuadraturePlan:
    return _single_patch_plan(0.5, 0.5, float("inf"), base_rule(rule, base_k), meta={"rule": rule})


def _clip_box(a, b, h):
    return (max(a - h, 0.0), min(a + h, 1.0)), (max(b - h, 0.0), min(b + h, 1.0))


def near_singular_plan(a: float, b: float, d: float, base_k: int = 16, *,
                       telles: bool = False, rule: str = "gauss",
                       max_depth: int = MAX_DEPTH) -> QuadraturePlan:
    """
    Tiling of [0,1]^2 refined around the peak (a,b) of a kernel at height d.

    Level L keeps a central box of half-width 0.5 * 3^-L about (a,b) and tiles the ring
    between it and the previous box with up to eight rectangles. Refinement stops once the
    half-width is <= d or at max_depth. Boxes are clipped to the face; zero-width strips are
    dropped. The central patch comes last.
    """
    if not (d > 0.0):
        raise QuadratureError(f"near-singular plan needs d > 0, got {d}")
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise GeometryError(f"plan center ({a}, {b}) outside [0,1]^2")

    r1 = base_rule(rule, base_k)
    meta = {"rule": rule, "telles": telles, "base_k": base_k}
    if d >= FAR_FIELD_D:
        return _single_patch_plan(a, b, d, base_rule(rule, max(base_k, FAR_FIELD_MIN_K)), meta=meta)

    patches = []
    (ps0, ps1), (pt0, pt1) = (0.0, 1.0), (0.0, 1.0)
    depth = 0
    h = 0.5
    while depth < max_depth:
        depth += 1
        h = 0.5 * 3.0 ** (-depth)
        (cs0, cs1), (ct0, ct1) = _clip_box(a, b, h)
        s_breaks = (ps0, cs0, cs1, ps1)
        t_breaks = (pt0, ct0, ct1, pt1)
        for i in range(3):
            for j in range(3):
                if i == 1 and j == 1:
                    continue
                s0, s1 = s_breaks[i], s_breaks[i + 1]
                t0, t1 = t_breaks[j], t_breaks[j + 1]
                if s1 - s0 <= 0.0 or t1 - t0 <= 0.0:
                    continue
                patches.append(Patch(s0, s1, t0, t1, r1, r1))
        (ps0, ps1), (pt0, pt1) = (cs0, cs1), (ct0, ct1)
        if h <= d:
            break

    rule_s = rule_t = r1
    if telles:
        hs, ht = 0.5 * (ps1 - ps0), 0.5 * (pt1 - pt0)
        rule_s = telles_map(r1, (a - ps0) / (ps1 - ps0), d / hs)
        rule_t = telles_map(r1, (b - pt0) / (pt1 - pt0), d / ht)
    patches.append(Patch(ps0, ps1, pt0, pt1, rule_s, rule_t, peak=(a, b)))

    logger.debug("plan (%.4g, %.4g) d=%.3g: depth %d, %d patches, central half-width %.3g",
                 a, b, d, depth, len(patches), h)
    return QuadraturePlan(patches=tuple(patches), a=a, b=b, d=d, depth=depth,
                          meta={**meta, "half_width": h})


def integrate_face(kernel, plan: QuadraturePlan) -> float:
    """
    Sum of tensor-product quadratures of kernel(s, t) over the plan's patches, in patch order.

    `kernel` takes equal-shape arrays s, t and returns an array of values.
    """
    total = 0.0
    for patch in plan.patches:
        s, t, w = patch.tensor()
        vals = np.asarray(kernel(s, t), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise QuadratureError(f"non-finite kernel value at (s, t) = ({s[bad]:.17g}, {t[bad]:.17g})",
                                  node=(float(s[bad]), float(t[bad])))
        total += float(np.dot(w, vals))
    return total
