"""Growth sequence ``Gamma_n = max(max_x ||d f^n||, max_x ||d f^-n||)``.

The norm is the maximum absolute row sum.  For the chart map only the second
row of the differential is non-trivial, so

    ||d_x f^n|| = 1 + A(u) |W'(n, phi1)| + |grad A(u)|_1 |W(n, phi1)|

and the inverse iterate has the same form with ``phi1`` replaced by
``phi1 - n alpha``.  The maximum over the product grid is computed exactly by
reducing the u-grid to the upper-right convex hull of the points
``(A(u), |grad A(u)|_1)``: for fixed ``phi1`` the row sum is a non-negative
combination of those two coordinates.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diffeo import ChartPoint, MapConfig
from .psi import PsiSpec, psi_eval, psi_validate
from .weyl import check_grid, default_grid, scan_extrema

NORM_NAME = "max-row-sum"
DEFAULT_SCHEDULE_MAX = 2**17
SUB_SLOPE = 0.5
SUPER_SLOPE = 1.5


def matrix_norm_maxrow(Q) -> float:
    """``max_i sum_j |q_ij|`` of a square matrix."""
    Q = np.asarray(Q, dtype=float)
    if Q.size == 0:
        raise ValueError("matrix_norm_maxrow: empty matrix")
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"matrix_norm_maxrow: expected a square matrix, got shape {Q.shape}")
    return float(np.max(np.sum(np.abs(Q), axis=1)))


@dataclass(frozen=True)
class GridSpec:
    """``phi_grid=None`` applies the Weyl grid rule; ``u_grid`` counts points per disc axis."""

    phi_grid: int | None = None
    u_grid: int = 257
    u_points: np.ndarray | None = field(default=None, compare=False)

    def phi_size(self, cfg: MapConfig) -> int:
        if self.phi_grid is None:
            return default_grid(cfg.F)
        return check_grid(cfg.F, self.phi_grid)

    def disc_points(self, dim: int) -> np.ndarray:
        if self.u_points is not None:
            pts = np.asarray(self.u_points, dtype=float).reshape(-1, dim)
            if np.any(np.sum(pts * pts, axis=1) >= 1.0):
                raise ValueError("u_points must lie in the open unit disc")
            return pts
        return disc_grid(dim, self.u_grid)


def disc_grid(dim: int, per_axis: int) -> np.ndarray:
    """Cell centres of a ``per_axis**dim`` grid on [-1, 1]^dim that fall inside |u| < 1."""
    if per_axis < 2:
        raise ValueError("u grid needs at least 2 points per axis")
    c = -1.0 + (2.0 * np.arange(per_axis) + 1.0) / per_axis
    mesh = np.stack(np.meshgrid(*([c] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    return mesh[np.sum(mesh * mesh, axis=1) < 1.0]


@dataclass(frozen=True)
class DiscHull:
    """Upper-right hull of ``{(A(u), |grad A(u)|_1)}`` with switching thresholds."""

    a: np.ndarray
    g: np.ndarray
    thresholds: np.ndarray
    index: np.ndarray  # grid index of each vertex (lowest index among duplicates)

    def kernel_args(self):
        return self.a, self.g, self.thresholds


def _cross(o, p, q):
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


def disc_hull(A_vals: np.ndarray, G_vals: np.ndarray) -> DiscHull:
    """Vertices maximising ``w*A + v*G`` for some ``(w, v) >= 0``, ordered from
    largest ``A`` to largest ``G``."""
    pts = {}
    for i, (x, y) in enumerate(zip(A_vals.tolist(), G_vals.tolist())):
        pts.setdefault((x, y), i)
    order = sorted(pts)
    upper: list[tuple[float, float]] = []
    for p in reversed(order):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    # upper runs from the rightmost point leftwards over the top; stop at max G
    gmax = max(p[1] for p in upper)
    verts = []
    for p in upper:
        verts.append(p)
        if p[1] == gmax:
            break
    a = np.array([p[0] for p in verts])
    g = np.array([p[1] for p in verts])
    thr = []
    for k in range(len(verts) - 1):
        s = (a[k] - a[k + 1]) / (g[k + 1] - g[k])
        thr.append(s / (1.0 + s))
    idx = np.array([pts[p] for p in verts], dtype=np.int64)
    return DiscHull(a, g, np.array(thr), idx)


def _prepare(cfg: MapConfig, grid: GridSpec):
    upts = grid.disc_points(cfg.dim)
    A_vals = np.asarray(cfg.A.value(upts), dtype=float).reshape(-1)
    G_vals = np.sum(np.abs(cfg.A.grad(upts)), axis=-1).reshape(-1)
    return upts, disc_hull(A_vals, G_vals)


def _scan(cfg: MapConfig, ns: np.ndarray, G: int, hull: DiscHull, threads: int):
    """Forward and inverse row-sum maxima (shear part only) for every n."""

    def job(sub, shift_back):
        return scan_extrema(cfg.F, cfg.alpha, sub, G, hull.kernel_args(), shift_back=shift_back)

    # +1 config: forward iterate is unshifted; a -1 config swaps the roles
    fwd_shift = cfg.direction < 0
    if threads <= 1 or ns.size < 2:
        return job(ns, fwd_shift), job(ns, not fwd_shift)
    chunks = np.array_split(ns, min(threads, ns.size))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        fw = list(pool.map(lambda c: job(c, fwd_shift), chunks))
        bw = list(pool.map(lambda c: job(c, not fwd_shift), chunks))

    def cat(parts):
        return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}

    return cat(fw), cat(bw)


@dataclass(frozen=True)
class GammaEntry:
    n: int
    gamma: float
    argmax: ChartPoint
    iterate_sign: int
    psi: float | None = None
    ratio: float | None = None


def _entries(cfg, ns, G, upts, hull, threads, psi=None):
    fw, bw = _scan(cfg, ns, G, hull, threads)
    out = []
    for i, n in enumerate(ns.tolist()):
        if bw["best"][i] > fw["best"][i]:
            res, sign = bw, -1
        else:
            res, sign = fw, 1
        gamma = 1.0 + max(0.0, float(res["best"][i]))
        u = upts[hull.index[res["best_v"][i]]]
        arg = ChartPoint(float(res["best_j"][i]) / G, 0.0, u.copy())
        if psi is not None:
            pv = psi_eval(psi, n)
            out.append(GammaEntry(n, gamma, arg, sign, pv, gamma / pv))
        else:
            out.append(GammaEntry(n, gamma, arg, sign))
    return out


def gamma_n(cfg: MapConfig, n: int, grid: GridSpec | None = None) -> tuple[float, ChartPoint]:
    """``(Gamma_n, argmax)`` over the product grid in ``(phi1, u)``.

    The region outside the chart contributes exactly 1 (identity differential).
    """
    if int(n) != n or n < 1:
        raise ValueError("gamma_n needs n >= 1")
    grid = grid or GridSpec()
    G = grid.phi_size(cfg)
    upts, hull = _prepare(cfg, grid)
    e = _entries(cfg, np.array([int(n)], dtype=np.int64), G, upts, hull, 1)[0]
    return e.gamma, e.argmax


@dataclass
class GrowthSeries:
    entries: list[GammaEntry]
    psi: PsiSpec
    phi_grid: int
    u_grid_points: int
    schedule: list[int]

    @property
    def ns(self) -> np.ndarray:
        return np.array([e.n for e in self.entries])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([e.gamma for e in self.entries])

    @property
    def ratios(self) -> np.ndarray:
        return np.array([e.ratio for e in self.entries])

    def tail(self) -> list[GammaEntry]:
        return self.entries[len(self.entries) // 2:]

    def summary(self) -> dict:
        tail = self.tail()
        r = np.array([e.ratio for e in tail])
        g = self.gammas
        t_n = np.array([e.n for e in tail], dtype=float)
        t_g = np.array([e.gamma for e in tail])
        slope = _loglog_slope(psi_eval(self.psi, t_n), t_g)
        if g.max() <= g.min() * (1.0 + 1e-9):
            verdict = "bounded"
        elif slope is None or slope < SUB_SLOPE:
            verdict = "sub-psi"
        elif slope > SUPER_SLOPE:
            verdict = "super-psi"
        else:
            verdict = "band"
        return {
            "norm": NORM_NAME,
            "psi": self.psi.label(),
            "sup_ratio_tail": float(r.max()),
            "inf_ratio_tail": float(r.min()),
            "tail_slope": slope,
            "verdict": verdict,
            "n_range": [int(self.entries[0].n), int(self.entries[-1].n)],
            "scope": "over tested range",
            "phi_grid": self.phi_grid,
            "u_grid_points": self.u_grid_points,
        }


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float | None:
    lx, ly = np.log(x), np.log(y)
    if lx.size < 2 or np.ptp(lx) == 0.0:
        return None
    return float(np.polyfit(lx, ly, 1)[0])


def dyadic_schedule(n_max: int = DEFAULT_SCHEDULE_MAX) -> list[int]:
    if n_max < 1:
        raise ValueError("dyadic schedule needs max >= 1")
    return [2**k for k in range(int(math.log2(n_max)) + 1) if 2**k <= n_max]


def refine_schedule(schedule, centers, width: int) -> list[int]:
    extra = {c + k for c in centers for k in range(-width, width + 1) if c + k >= 1}
    return sorted(set(schedule) | extra)


def gamma_series(cfg: MapConfig, schedule=None, grid: GridSpec | None = None,
                 psi: PsiSpec | None = None, threads: int = 1) -> GrowthSeries:
    psi = psi or PsiSpec("power", beta=0.5)
    psi_validate(psi, strict=True)
    schedule = sorted(set(int(n) for n in (schedule or dyadic_schedule())))
    if schedule[0] < 1:
        raise ValueError("schedule entries must be >= 1")
    grid = grid or GridSpec()
    G = grid.phi_size(cfg)
    upts, hull = _prepare(cfg, grid)
    ns = np.array(schedule, dtype=np.int64)
    entries = _entries(cfg, ns, G, upts, hull, threads, psi)
    return GrowthSeries(entries, psi, G, int(upts.shape[0]), schedule)
