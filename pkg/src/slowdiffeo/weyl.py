"""Weyl sums ``W(N, x, alpha) = sum_{k<N} F(x + k alpha)`` and their x-derivatives.

Two independent evaluation paths are provided: plain summation along the
orbit, and a per-harmonic closed form obtained by summing the geometric series
``exp(2 pi i m (x + k alpha))``.  Grid scans always use the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .numeric import TWO_PI, FourierSeries

RESONANCE_TOL = 1e-12
MIN_GRID = 4096
OVERSAMPLE = 64


@dataclass(frozen=True)
class WeylScanResult:
    N: int
    max_abs_W: float
    max_abs_Wprime: float
    argmax_x: float
    grid_size: int


def default_grid(F: FourierSeries) -> int:
    return max(MIN_GRID, OVERSAMPLE * F.m_max)


def check_grid(F: FourierSeries, grid_size: int) -> int:
    grid_size = int(grid_size)
    if grid_size < 4 * max(1, F.m_max):
        raise ValueError(
            f"grid of {grid_size} points too coarse for harmonic {F.m_max}; need >= {4 * max(1, F.m_max)}"
        )
    return grid_size


def _check_n(N) -> int:
    if int(N) != N or N < 0:
        raise ValueError(f"N must be a non-negative integer, got {N}")
    return int(N)


def weyl_sum_direct(F: FourierSeries, alpha, N: int, x):
    """Orbit summation; ``N = 0`` gives the empty sum."""
    N = _check_n(N)
    a = float(alpha)
    x = np.asarray(x, dtype=float)
    if N == 0:
        out = np.zeros(x.shape)
    else:
        k = np.arange(N, dtype=float)
        pts = x[..., None] + k * a
        out = np.sum(F.value(pts), axis=-1)
    return float(out) if out.ndim == 0 else out


def weyl_deriv_direct(F: FourierSeries, alpha, N: int, x):
    return weyl_sum_direct(F.derivative(), alpha, N, x)


def _frac(v):
    return np.mod(v, 1.0)


def geometric_sums(ms, alpha: float, ns) -> np.ndarray:
    """``S[i, h] = sum_{k < ns[i]} exp(2 pi i ms[h] k alpha)``.

    Harmonics with ``|1 - exp(2 pi i m alpha)| <= RESONANCE_TOL`` are summed
    term by term instead of through the closed form.
    """
    ms = np.asarray(ms, dtype=np.int64)
    ns = np.asarray(ns, dtype=np.int64)
    out = np.empty((ns.size, ms.size), dtype=complex)
    for h, m in enumerate(ms):
        theta = math.fmod(float(m) * alpha, 1.0)
        z = complex(math.cos(TWO_PI * theta), math.sin(TWO_PI * theta))
        if abs(1.0 - z) > RESONANCE_TOL:
            ph = TWO_PI * _frac(ns.astype(float) * theta)
            out[:, h] = (np.exp(1j * ph) - 1.0) / (z - 1.0)
        else:
            nmax = int(ns.max()) if ns.size else 0
            k = np.arange(nmax, dtype=float)
            terms = np.exp(1j * TWO_PI * _frac(float(m) * alpha * k))
            csum = np.concatenate(([0.0 + 0.0j], np.cumsum(terms)))
            out[:, h] = csum[ns]
    return out


def harmonic_coefficients(F: FourierSeries, alpha, ns, shift_back: bool = False) -> np.ndarray:
    """Complex ``c[i, h]`` with ``W(ns[i], x) = c0*n + Re sum_h c[i,h] e^{2 pi i m_h x}``.

    With ``shift_back`` the coefficients describe ``x -> W(n, x - n alpha)``,
    the quantity entering the inverse iterate.
    """
    ms, a, b = F.arrays
    a_ = float(alpha)
    ns = np.asarray(ns, dtype=np.int64)
    c = (a - 1j * b)[None, :] * geometric_sums(ms, a_, ns)
    if shift_back and ms.size:
        theta = np.array([math.fmod(float(m) * a_, 1.0) for m in ms])
        c = c * np.exp(-1j * TWO_PI * _frac(np.outer(ns.astype(float), theta)))
    return c


def _closed_eval(F, alpha, N, x, derivative: bool):
    N = _check_n(N)
    x = np.asarray(x, dtype=float)
    ms, _, _ = F.arrays
    out = np.zeros(x.shape) if derivative else np.full(x.shape, F.c0 * N)
    if N == 0 or ms.size == 0:
        return float(out) if out.ndim == 0 else out
    c = harmonic_coefficients(F, alpha, [N])[0]
    for h, m in enumerate(ms):
        e = np.exp(1j * TWO_PI * _frac(float(m) * x))
        if derivative:
            out = out + np.real(1j * TWO_PI * m * c[h] * e)
        else:
            out = out + np.real(c[h] * e)
    return float(out) if out.ndim == 0 else out


def weyl_sum_closed(F: FourierSeries, alpha, N: int, x):
    return _closed_eval(F, alpha, N, x, derivative=False)


def weyl_deriv(F: FourierSeries, alpha, N: int, x, method: str = "closed"):
    """``W'(N, x) = sum_{k<N} F'(x + k alpha)``."""
    if method == "direct":
        return weyl_deriv_direct(F, alpha, N, x)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    return _closed_eval(F, alpha, N, x, derivative=True)


def grid_values(F: FourierSeries, alpha, N: int, grid_size: int | None = None):
    """Signed ``(x, W, W')`` on the grid ``{j / grid_size}``."""
    N = _check_n(N)
    G = check_grid(F, grid_size or default_grid(F))
    ms, _, _ = F.arrays
    c = harmonic_coefficients(F, alpha, [N])[0] if ms.size else np.zeros(0, complex)
    cos_t, sin_t = _kernels.unit_table(G)
    w = np.empty(G)
    wp = np.empty(G)
    _kernels.signed_grid_values(
        ms, np.ascontiguousarray(c.real), np.ascontiguousarray(c.imag), F.c0 * N, cos_t, sin_t, w, wp
    )
    return np.arange(G) / G, w, wp


def weyl_extrema(F: FourierSeries, alpha, N: int, grid_size: int | None = None) -> WeylScanResult:
    """Maxima of ``|W|`` and ``|W'|`` over ``{j / grid_size}``; lowest index wins ties."""
    N = _check_n(N)
    G = check_grid(F, grid_size or default_grid(F))
    stats = scan_extrema(F, alpha, [N], G)
    return WeylScanResult(
        N=N,
        max_abs_W=float(stats["max_w"][0]),
        max_abs_Wprime=float(stats["max_wp"][0]),
        argmax_x=float(stats["arg_wp"][0]) / G,
        grid_size=G,
    )


_NO_HULL = (np.zeros(1), np.zeros(1), np.zeros(0))


def scan_extrema(F: FourierSeries, alpha, ns, G: int, hull=None, shift_back: bool = False,
                 chunk: int = 512) -> dict:
    """Run the compiled scan for every n in ``ns``.

    ``hull`` is ``(hull_a, hull_g, thresholds)`` as built by the growth module;
    without it only the plain ``|W|``/``|W'|`` maxima are meaningful.
    """
    ns = np.asarray(ns, dtype=np.int64)
    ms, _, _ = F.arrays
    hull_a, hull_g, thr = hull if hull is not None else _NO_HULL
    cos_t, sin_t = _kernels.unit_table(G)
    R = ns.size
    res = {
        "best": np.empty(R),
        "best_j": np.empty(R, dtype=np.int64),
        "best_v": np.empty(R, dtype=np.int64),
        "max_w": np.empty(R),
        "max_wp": np.empty(R),
        "arg_wp": np.empty(R, dtype=np.int64),
    }
    for start in range(0, R, chunk):
        sl = slice(start, min(R, start + chunk))
        sub = ns[sl]
        if ms.size:
            c = harmonic_coefficients(F, alpha, sub, shift_back=shift_back)
        else:
            c = np.zeros((sub.size, 0), dtype=complex)
        _kernels.scan_rows(
            ms, np.ascontiguousarray(c.real), np.ascontiguousarray(c.imag),
            F.c0 * sub.astype(float), cos_t, sin_t, hull_a, hull_g, thr,
            res["best"][sl], res["best_j"][sl], res["best_v"][sl],
            res["max_w"][sl], res["max_wp"][sl], res["arg_wp"][sl],
        )
    return res


def has_zero_on_grid(values: np.ndarray) -> bool:
    """True if a periodic grid sequence hits zero or changes sign (wrap-around included)."""
    v = np.asarray(values)
    if np.any(v == 0.0):
        return True
    s = np.sign(v)
    return bool(np.any(s != np.roll(s, -1)))

