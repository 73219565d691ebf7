"""
Integer-order Bessel functions of the first kind and their positive zeros.

J_n is computed by Miller's backward recurrence normalized with J_0 + 2 sum J_2k = 1,
vectorized over the argument. Zeros are bracketed on a scan grid and polished by
Newton's method with a bisection fallback.
"""

import logging
import math
from functools import lru_cache

import numpy as np

from .errors import RangeError, TruncationError

logger = logging.getLogger(__name__)

# ===== Config =====
MAX_ORDER = 50
MAX_ARGUMENT = 200.0
MAX_ZERO_INDEX = 100
RESCALE = 1e250
SCAN_STEP = 0.25
SMALL_ARGUMENT = 1e-8


def _start_index(n: int, x: float) -> int:
    m = max(n, x)
    return 2 * ((int(m) + 15 + int(math.sqrt(40.0 * m))) // 2)


def _bessel_j_unchecked(n: int, x):
    """J_n(x) for any integer n >= 0 and moderate |x| (used internally up to |x| ~ 450)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ax = np.abs(x)
    out = np.zeros_like(ax)

    small = ax < SMALL_ARGUMENT
    if np.any(small):
        h = 0.5 * ax[small]
        out[small] = h ** n / math.factorial(n) * (1.0 - h * h / (n + 1))

    big = ~small
    if np.any(big):
        xb = ax[big]
        M = _start_index(n, float(xb.max()))
        j_next = np.zeros_like(xb)
        j_cur = np.full_like(xb, 1e-30)
        norm = np.zeros_like(xb)
        result = np.zeros_like(xb)
        for k in range(M, 0, -1):
            j_prev = (2.0 * k / xb) * j_cur - j_next
            j_next, j_cur = j_cur, j_prev
            if k - 1 == n:
                result = j_cur.copy()
            if (k - 1) % 2 == 0 and k - 1 > 0:
                norm += 2.0 * j_cur
            over = np.abs(j_cur) > RESCALE
            if np.any(over):
                j_cur[over] /= RESCALE
                j_next[over] /= RESCALE
                norm[over] /= RESCALE
                result[over] /= RESCALE
        norm += j_cur
        out[big] = result / norm

    if n % 2 == 1:
        out = np.where(x < 0, -out, out)
    return float(out[0]) if scalar else out


def _check_range(order, argument):
    if int(order) != order or order < 0 or order > MAX_ORDER:
        raise RangeError(f"Bessel order must be an integer in [0, {MAX_ORDER}], got {order}")
    if np.any(np.abs(np.asarray(argument, dtype=float)) > MAX_ARGUMENT):
        raise RangeError(f"Bessel argument must satisfy |x| <= {MAX_ARGUMENT}")


def bessel_j(order: int, argument):
    """J_order(argument); scalar or array argument."""
    _check_range(order, argument)
    return _bessel_j_unchecked(int(order), argument)


def bessel_j_prime(n: int, x):
    if n == 0:
        return -_bessel_j_unchecked(1, x)
    return 0.5 * (_bessel_j_unchecked(n - 1, x) - _bessel_j_unchecked(n + 1, x))


def _polish_zero(n: int, lo: float, hi: float, f_lo: float) -> float:
    x = 0.5 * (lo + hi)
    for _ in range(60):
        fx = _bessel_j_unchecked(n, x)
        if fx == 0.0:
            return x
        if (fx < 0) == (f_lo < 0):
            lo, f_lo = x, fx
        else:
            hi = x
        step = fx / bessel_j_prime(n, x)
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


@lru_cache(maxsize=None)
def _zeros(n: int, count: int) -> tuple:
    found = []
    start = float(n)
    stop = (count + 0.5 * n - 0.25) * math.pi + 2.0 * math.pi
    while len(found) < count:
        grid = np.arange(start, stop + SCAN_STEP, SCAN_STEP)
        vals = _bessel_j_unchecked(n, grid)
        for i in range(grid.size - 1):
            if len(found) == count:
                break
            if vals[i] == 0.0 and grid[i] > 0.0:
                found.append(float(grid[i]))
            elif vals[i] * vals[i + 1] < 0.0:
                found.append(_polish_zero(n, grid[i], grid[i + 1], vals[i]))
        start = float(grid[-1])
        stop = start + 10.0 * math.pi
        if start > 1000.0:
            raise TruncationError(f"zero scan for J_{n} ran past x=1000 with {len(found)} zeros")
    logger.debug("J_%d: %d zeros up to %.6f", n, count, found[-1])
    return tuple(found)


def bessel_zeros(order: int, count: int) -> np.ndarray:
    """The first `count` positive zeros of J_order, increasing."""
    if count < 1:
        raise RangeError(f"zero count must be positive, got {count}")
    return np.array(_zeros(int(order), int(count)))


def bessel_zero(order: int, index: int) -> float:
    """m-th positive zero of J_order (index starts at 1)."""
    if int(order) != order or not (0 <= order <= MAX_ORDER):
        raise RangeError(f"Bessel order must be an integer in [0, {MAX_ORDER}], got {order}")
    if int(index) != index or not (1 <= index <= MAX_ZERO_INDEX):
        raise RangeError(f"zero index must be an integer in [1, {MAX_ZERO_INDEX}], got {index}")
    return float(bessel_zeros(order, index)[-1])
