"""Hot numeric kernels: numba fast path plus a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``CITEDIST_DISABLE_NUMBA`` is unset (or ``0``).  Both paths stay
importable so tests and ``benchmarks/bench_kernels.py`` can compare them.
"""
from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import zeta as _scipy_zeta

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("CITEDIST_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = numba is not None and not _DISABLED

EULER_GAMMA = 0.57721566490153286061
# zeta(2..41), used by the log-gamma series around 1
_ZETA = np.asarray(_scipy_zeta(np.arange(2, 42, dtype=np.float64)), dtype=np.float64)
_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 1000


def _log_uigamma_scalar(s, z):
    """log of the upper incomplete gamma function Gamma(s, z) for z > 0.

    Three regimes:
      * z large relative to s: modified Lentz continued fraction, valid for
        any real s;
      * s >= 1, z below s + 1: Gamma(s) minus the lower-gamma series;
      * s < 1, z small: evaluate at a = s + k in (-1/2, 1) with a form
        that stays finite as a -> 0, then recur downward
        Gamma(t - 1, z) = (z**(t-1) e**-z - Gamma(t, z)) / (1 - t).
    """
    logz = math.log(z)
    if z > 1.0 and z >= s + 1.0:
        b = z + 1.0 - s
        c = 1.0 / _TINY
        d = 1.0 / b
        h = d
        for i in range(1, _MAX_ITER):
            an = -i * (i - s)
            b += 2.0
            d = an * d + b
            if abs(d) < _TINY:
                d = _TINY
            c = b + an / c
            if abs(c) < _TINY:
                c = _TINY
            d = 1.0 / d
            delta = d * c
            h *= delta
            if abs(delta - 1.0) < _EPS:
                break
        return -z + s * logz + math.log(h)

    if s >= 1.0:
        # lower series: gamma(s, z) = e^-z z^s sum z^n / (s (s+1) ... (s+n))
        ap = s
        term = 1.0 / s
        total = term
        for _ in range(_MAX_ITER):
            ap += 1.0
            term *= z / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        lower = math.exp(-z + s * logz) * total
        return math.log(math.gamma(s) - lower)

    # lift to the a nearest zero; keeps every 1 / (1 - t) below 2
    k = int(math.floor(0.5 - s)) if s < 0.5 else 0
    a = s + k
    # (Gamma(1 + a) - 1) / a, finite at a = 0
    if abs(a) < 0.2:
        lg = -EULER_GAMMA * a
        pw = -a
        for j in range(_ZETA.shape[0]):
            pw *= -a
            t = pw * _ZETA[j] / (j + 2)
            lg += t
            if abs(t) < 1e-18:
                break
        g = math.expm1(lg) / a if a != 0.0 else -EULER_GAMMA
    else:
        g = (math.gamma(1.0 + a) - 1.0) / a
    # expm1(a log z) / a -> log z as a -> 0
    if a != 0.0:
        e = math.expm1(a * logz) / a
    else:
        e = logz
    # tail series: sum_{n>=1} (-z)^n / (n! (a + n))
    tail = 0.0
    fact = 1.0
    for n in range(1, _MAX_ITER):
        fact *= -z / n
        t = fact / (a + n)
        tail += t
        if abs(t) < _EPS * abs(tail):
            break
    za = math.exp(a * logz)
    val = g - e - za * tail
    # downward recurrence from a to s
    t_cur = a
    emz = math.exp(-z)
    for _ in range(k):
        val = (math.exp((t_cur - 1.0) * logz) * emz - val) / (1.0 - t_cur)
        t_cur -= 1.0
    return math.log(val)


def _log_uigamma_loop(scalar):
    def kernel(s, z):
        out = np.empty(z.shape[0])
        for i in range(z.shape[0]):
            out[i] = scalar(s, z[i])
        return out

    return kernel


def _ks_sorted_loop(cdf):
    n = cdf.shape[0]
    best = 0.0
    for i in range(n):
        hi = (i + 1) / n - cdf[i]
        lo = cdf[i] - i / n
        if hi > best:
            best = hi
        if lo > best:
            best = lo
    return best


def _log_uigamma_numpy(s, z):
    """Vectorised numpy version of :func:`_log_uigamma_scalar` (scalar s, array z)."""
    s = float(s)
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    logz = np.log(z)
    cf = (z > 1.0) & (z >= s + 1.0)
    if cf.any():
        zz = z[cf]
        b = zz + 1.0 - s
        c = np.full_like(zz, 1.0 / _TINY)
        d = 1.0 / b
        h = d.copy()
        active = np.ones(zz.shape, dtype=bool)
        for i in range(1, _MAX_ITER):
            an = -i * (i - s)
            b = b + 2.0
            d = an * d + b
            d = np.where(np.abs(d) < _TINY, _TINY, d)
            c = b + an / c
            c = np.where(np.abs(c) < _TINY, _TINY, c)
            d = 1.0 / d
            delta = d * c
            h = np.where(active, h * delta, h)
            active &= np.abs(delta - 1.0) >= _EPS
            if not active.any():
                break
        out[cf] = -zz + s * logz[cf] + np.log(h)
    rest = ~cf
    if not rest.any():
        return out
    zz = z[rest]
    lz = logz[rest]
    if s >= 1.0:
        ap = s
        term = np.full_like(zz, 1.0 / s)
        total = term.copy()
        for _ in range(_MAX_ITER):
            ap += 1.0
            term = term * zz / ap
            total = total + term
            if np.all(np.abs(term) < np.abs(total) * _EPS):
                break
        lower = np.exp(-zz + s * lz) * total
        out[rest] = np.log(math.gamma(s) - lower)
        return out
    k = int(math.floor(0.5 - s)) if s < 0.5 else 0
    a = s + k
    if abs(a) < 0.2:
        lg = -EULER_GAMMA * a
        pw = -a
        for j in range(_ZETA.shape[0]):
            pw *= -a
            lg += pw * _ZETA[j] / (j + 2)
        g = math.expm1(lg) / a if a != 0.0 else -EULER_GAMMA
    else:
        g = (math.gamma(1.0 + a) - 1.0) / a
    e = np.expm1(a * lz) / a if a != 0.0 else lz
    tail = np.zeros_like(zz)
    fact = np.ones_like(zz)
    for n in range(1, _MAX_ITER):
        fact = fact * (-zz / n)
        t = fact / (a + n)
        tail = tail + t
        if np.all(np.abs(t) <= _EPS * np.abs(tail)):
            break
    val = g - e - np.exp(a * lz) * tail
    emz = np.exp(-zz)
    t_cur = a
    for _ in range(k):
        val = (np.exp((t_cur - 1.0) * lz) * emz - val) / (1.0 - t_cur)
        t_cur -= 1.0
    out[rest] = np.log(val)
    return out


def _ks_sorted_numpy(cdf):
    cdf = np.asarray(cdf, dtype=np.float64)
    n = cdf.shape[0]
    i = np.arange(n, dtype=np.float64)
    return float(max(np.max((i + 1.0) / n - cdf), np.max(cdf - i / n)))


if numba is not None:
    _jit = numba.njit(cache=True, nogil=True)
    log_uigamma_scalar_nb = _jit(_log_uigamma_scalar)
    log_uigamma_array_nb = _jit(_log_uigamma_loop(log_uigamma_scalar_nb))
    ks_sorted_nb = _jit(_ks_sorted_loop)
else:  # pragma: no cover
    log_uigamma_scalar_nb = log_uigamma_array_nb = ks_sorted_nb = None


def log_uigamma(s: float, z: float) -> float:
    """Scalar log Gamma(s, z); no range checks (callers validate)."""
    if USE_NUMBA:
        return log_uigamma_scalar_nb(float(s), float(z))
    return _log_uigamma_scalar(float(s), float(z))


def log_uigamma_array(s: float, z) -> np.ndarray:
    z = np.ascontiguousarray(z, dtype=np.float64)
    if USE_NUMBA:
        return log_uigamma_array_nb(float(s), z)
    return _log_uigamma_numpy(s, z)


def ks_sorted(cdf) -> float:
    """Two-sided KS distance given model CDF values at sorted observations."""
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    if cdf.shape[0] == 0:
        raise ValueError("empty sample")
    if USE_NUMBA:
        return float(ks_sorted_nb(cdf))
    return _ks_sorted_numpy(cdf)
