"""Bessel functions of the first kind of integer order and zeros of J_k'.

J_k is evaluated by its power series for small arguments and by Miller's
backward recurrence (normalised with J_0 + 2*sum J_2m = 1) otherwise.
Both paths are vectorised over ``x``.
"""

from __future__ import annotations

import math
import threading

import numpy as np

__all__ = [
    "DomainError",
    "bessel_j",
    "bessel_jp",
    "bessel_table",
    "bessel_prime_zero",
    "bessel_prime_zeros",
    "bessel_prime_zeros_below",
]

_SERIES_MAX_X = 2.0
_RESCALE = 1e250


class DomainError(ValueError):
    """Negative order or argument."""


def _check(k, x):
    if k < 0:
        raise DomainError(f"order must be nonnegative, got {k}")
    if np.any(np.asarray(x) < 0):
        raise DomainError("argument must be nonnegative")


def _series(k: int, x: np.ndarray) -> np.ndarray:
    half = x / 2.0
    term = half**k / math.factorial(k)
    out = term.copy()
    q = -(half * half)
    for m in range(1, 60):
        term = term * q / (m * (m + k))
        out += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(out), 1e-300)):
            break
    return out


def _miller(nmax: int, x: np.ndarray) -> np.ndarray:
    """Rows J_0..J_nmax at every (positive) x by backward recurrence."""
    top = max(nmax, int(np.max(x)))
    start = top + 20 + int(math.sqrt(40.0 * top))
    start += start % 2
    table = np.zeros((nmax + 1, x.size))
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    inv_x = 1.0 / x
    for n in range(start, 0, -1):
        # j_cur holds J_n (unnormalised), j_next holds J_{n+1}
        if n <= nmax:
            table[n] = j_cur
        if n % 2 == 0:
            norm += 2.0 * j_cur
        j_prev = 2.0 * n * inv_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            table *= scale
    table[0] = j_cur
    norm += j_cur
    return table / norm


def bessel_table(nmax: int, x) -> np.ndarray:
    """Array of shape (nmax+1, *x.shape) with J_0(x) .. J_nmax(x)."""
    _check(nmax, x)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    flat = xa.ravel()
    out = np.empty((nmax + 1, flat.size))
    small = flat < _SERIES_MAX_X
    if np.any(small):
        xs = flat[small]
        for k in range(nmax + 1):
            out[k, small] = _series(k, xs)
    if np.any(~small):
        out[:, ~small] = _miller(nmax, flat[~small])
    out = out.reshape((nmax + 1,) + xa.shape)
    if np.ndim(x) == 0:
        return out[:, 0]
    return out


def bessel_j(k: int, x):
    """J_k(x) for integer k >= 0 and x >= 0."""
    _check(k, x)
    if np.ndim(x) == 0 and float(x) == 0.0:
        return 1.0 if k == 0 else 0.0
    return bessel_table(k, x)[k] if np.ndim(x) else float(bessel_table(k, x)[k])


def bessel_jp(k: int, x):
    """Derivative J_k'(x)."""
    _check(k, x)
    tab = bessel_table(k + 1, x)
    if k == 0:
        out = -tab[1]
    else:
        out = 0.5 * (tab[k - 1] - tab[k + 1])
    return out if np.ndim(x) else float(out)


def _refine(k: int, a: float, b: float, fa: float) -> float:
    """Zero of J_k' in [a, b] by Newton steps safeguarded with bisection."""
    x = 0.5 * (a + b)
    for _ in range(200):
        tab = bessel_table(k + 1, x)
        jk = tab[k]
        d1 = -tab[1] if k == 0 else 0.5 * (tab[k - 1] - tab[k + 1])
        if d1 == 0.0:
            return x
        if np.sign(d1) == np.sign(fa):
            a, fa = x, d1
        else:
            b = x
        # Bessel's equation gives J'' = -J'/x - (1 - k^2/x^2) J
        d2 = -d1 / x - (1.0 - k * k / (x * x)) * jk
        step_ok = d2 != 0.0
        x_new = x - d1 / d2 if step_ok else 0.5 * (a + b)
        if not (a < x_new < b):
            x_new = 0.5 * (a + b)
        if abs(x_new - x) < 1e-15 * max(1.0, x) or b - a < 1e-14 * max(1.0, x):
            return x_new
        x = x_new
    return x


_zero_cache: dict[int, list[float]] = {}
_zero_lock = threading.Lock()
_SCAN_STEP = 0.05


def _extend_zeros(k: int, count: int) -> list[float]:
    with _zero_lock:
        zeros = _zero_cache.setdefault(k, [])
        if len(zeros) >= count:
            return zeros
        # J_k' has no zeros on (0, k] for k >= 1 and J_0' = -J_1 < 0 near 0+
        lo = zeros[-1] + 1e-6 if zeros else max(float(k), 1e-3)
        while len(zeros) < count:
            span = max(40.0, 4.0 * (count - len(zeros)))
            grid = lo + _SCAN_STEP * np.arange(int(span / _SCAN_STEP) + 1)
            vals = bessel_jp(k, grid)
            for i in range(grid.size - 1):
                if vals[i] == 0.0:
                    zeros.append(float(grid[i]))
                elif vals[i] * vals[i + 1] < 0.0:
                    zeros.append(_refine(k, float(grid[i]), float(grid[i + 1]), float(vals[i])))
                if len(zeros) >= count:
                    break
            lo = float(grid[-1])
        return zeros


def bessel_prime_zeros(k: int, count: int) -> np.ndarray:
    """The first ``count`` positive zeros of J_k'."""
    if k < 0:
        raise DomainError(f"order must be nonnegative, got {k}")
    return np.array(_extend_zeros(k, count)[:count])


def bessel_prime_zero(k: int, n: int) -> float:
    """x_{kn}: the n-th positive zero of J_k', with x_{00} = 0."""
    if k < 0:
        raise DomainError(f"order must be nonnegative, got {k}")
    if n < 0 or (k >= 1 and n == 0):
        raise IndexError(f"no Bessel-derivative zero with index ({k},{n})")
    if n == 0:
        return 0.0
    return float(_extend_zeros(k, n)[n - 1])


def bessel_prime_zeros_below(k: int, xmax: float) -> np.ndarray:
    """Positive zeros of J_k' strictly below ``xmax`` (x_{00} = 0 excluded)."""
    count = 4
    while True:
        zeros = bessel_prime_zeros(k, count)
        if zeros[-1] >= xmax:
            return zeros[zeros < xmax]
        count *= 2
