"""The skew product on the chart T^2 x D and its two S^1 x S^2 realisations.

Chart map: ``f1(phi1, phi2, u) = (phi1 + alpha, phi2 + A(u) F(phi1), u)``.
Its iterates are ``(phi1 + m alpha, phi2 + A(u) W(m, phi1), u)`` for m >= 0
and ``(phi1 + m alpha, phi2 - A(u) W(|m|, phi1 + m alpha), u)`` for m < 0,
the latter being forced by solving the forward formula for the preimage.

All point operations accept scalar or array-valued coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .numeric import BumpProfile, FourierSeries, ZeroBump, as_disc_points, circle_dist, circle_reduce
from .rotation import RotationNumber, alpha_make
from .weyl import weyl_deriv, weyl_sum_closed

VARIANTS = ("chart", "example1", "example2")
CHAIN_LIMIT = 10_000
FIXED_TOL = 1e-10


@dataclass(frozen=True)
class MapConfig:
    F: FourierSeries
    alpha: RotationNumber
    A: BumpProfile | ZeroBump = field(default_factory=BumpProfile)
    variant: str = "chart"
    # -1 means the config describes the inverse map: its m-th iterate is f^{-m}
    direction: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if not isinstance(self.alpha, RotationNumber):
            object.__setattr__(self, "alpha", alpha_make(self.alpha))
        if self.variant != "chart" and self.A.dim != 1:
            raise ValueError("S^1 x S^2 examples need a one-dimensional disc (dim = 1)")

    @property
    def dim(self) -> int:
        return self.A.dim

    @property
    def a(self) -> float:
        return self.alpha.alpha

    def inverse(self) -> MapConfig:
        return replace(self, direction=-self.direction)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "F": self.F.to_dict(),
            "alpha": self.alpha.to_dict(),
            "A": self.A.to_dict(),
            "direction": self.direction,
        }


@dataclass(frozen=True)
class ChartPoint:
    phi1: float | np.ndarray
    phi2: float | np.ndarray
    u: np.ndarray

    @classmethod
    def make(cls, phi1, phi2, u, dim: int | None = None) -> ChartPoint:
        u = np.asarray(u, dtype=float)
        if dim is not None:
            u = as_disc_points(u, dim)
        elif u.ndim == 0:
            u = u[None]
        if np.any(np.sum(u * u, axis=-1) >= 1.0):
            raise ValueError("chart point must satisfy |u| < 1")
        return cls(circle_reduce(phi1), circle_reduce(phi2), u)

    def as_array(self) -> np.ndarray:
        p1 = np.asarray(self.phi1, dtype=float)[..., None]
        p2 = np.asarray(self.phi2, dtype=float)[..., None]
        return np.concatenate([p1, p2, np.asarray(self.u, dtype=float)], axis=-1)


@dataclass(frozen=True)
class SphereChart:
    """Point of S^1 x S^2 away from the poles, in ``(lambda, theta, z)``."""

    lam: float
    theta: float
    z: float

    def __post_init__(self):
        if not abs(self.z) < 1.0:
            raise ValueError("chart points need |z| < 1; use SpherePole for the poles")


@dataclass(frozen=True)
class SpherePole:
    lam: float
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("pole sign must be +1 or -1")


SpherePoint = Union[SphereChart, SpherePole]


def _bump(cfg: MapConfig, u):
    return cfg.A.value(u), cfg.A.grad(u)


def _weyl_pair(F, alpha, n, x):
    return weyl_sum_closed(F, alpha, n, x), weyl_deriv(F, alpha, n, x)


def _signed_iterate(cfg: MapConfig, m: int) -> int:
    return int(m) * cfg.direction


def _shear(cfg: MapConfig, m: int, base, amp):
    """Return ``(new_base, increment)`` of the m-th iterate of the base/fiber skew product."""
    a = cfg.a
    if m >= 0:
        return circle_reduce(np.asarray(base) + m * a), amp * weyl_sum_closed(cfg.F, cfg.alpha, m, base)
    back = np.asarray(base) + m * a
    return circle_reduce(back), -amp * weyl_sum_closed(cfg.F, cfg.alpha, -m, back)


def _require_chart(cfg: MapConfig):
    if cfg.variant != "chart":
        raise ValueError("this operation needs a chart-variant MapConfig")


def f1_apply(cfg: MapConfig, x: ChartPoint) -> ChartPoint:
    _require_chart(cfg)
    return _one_step(cfg, cfg.direction, x)


def f1_inverse(cfg: MapConfig, x: ChartPoint) -> ChartPoint:
    _require_chart(cfg)
    return _one_step(cfg, -cfg.direction, x)


def _one_step(cfg: MapConfig, sign: int, x: ChartPoint) -> ChartPoint:
    # literal one-step formulas, used as the composition oracle
    A = cfg.A.value(x.u)
    a = cfg.a
    if sign > 0:
        return ChartPoint(circle_reduce(x.phi1 + a), circle_reduce(x.phi2 + A * cfg.F.value(x.phi1)), x.u)
    p = x.phi1 - a
    return ChartPoint(circle_reduce(p), circle_reduce(x.phi2 - A * cfg.F.value(p)), x.u)


def f1_compose(cfg: MapConfig, m: int, x: ChartPoint) -> ChartPoint:
    """``|m|``-fold application of the one-step map (or its inverse)."""
    _require_chart(cfg)
    m = _signed_iterate(cfg, m)
    sign = 1 if m >= 0 else -1
    for _ in range(abs(m)):
        x = _one_step(cfg, sign, x)
    return x


def f1_iterate_closed(cfg: MapConfig, m: int, x: ChartPoint) -> ChartPoint:
    _require_chart(cfg)
    m = _signed_iterate(cfg, m)
    A = cfg.A.value(x.u)
    new_phi1, inc = _shear(cfg, m, x.phi1, A)
    return ChartPoint(new_phi1, circle_reduce(x.phi2 + inc), x.u)


def _jacobian_rows(d: int, shape, c_phi1, c_u):
    J = np.zeros(shape + (d + 2, d + 2))
    idx = np.arange(d + 2)
    J[..., idx, idx] = 1.0
    J[..., 1, 0] = c_phi1
    J[..., 1, 2:] = c_u
    return J


def jacobian_closed(cfg: MapConfig, m: int, x: ChartPoint) -> np.ndarray:
    """Differential of the m-th iterate in ``(phi1, phi2, u)`` coordinates.

    Negative ``m`` differentiates the closed inverse-iterate formula directly.
    Batched points give an array of shape ``(..., d+2, d+2)``.
    """
    if cfg.variant not in VARIANTS:
        raise ValueError(cfg.variant)
    m = _signed_iterate(cfg, m)
    A, gA = _bump(cfg, x.u)
    if m >= 0:
        base, sign, n = np.asarray(x.phi1, dtype=float), 1.0, m
    else:
        base, sign, n = np.asarray(x.phi1, dtype=float) + m * cfg.a, -1.0, -m
    W, Wp = _weyl_pair(cfg.F, cfg.alpha, n, base)
    W = np.asarray(W)
    c_phi1 = sign * A * Wp
    c_u = sign * gA * W[..., None]
    return _jacobian_rows(cfg.dim, np.shape(c_phi1), c_phi1, c_u)


def _one_step_jacobian(cfg: MapConfig, sign: int, x: ChartPoint) -> np.ndarray:
    A, gA = _bump(cfg, x.u)
    if sign > 0:
        p = x.phi1
        c_phi1, c_u = A * cfg.F.deriv(p), gA * np.asarray(cfg.F.value(p))[..., None]
    else:
        p = np.asarray(x.phi1) - cfg.a
        c_phi1, c_u = -A * cfg.F.deriv(p), -gA * np.asarray(cfg.F.value(p))[..., None]
    return _jacobian_rows(cfg.dim, np.shape(c_phi1), c_phi1, c_u)


def jacobian_chain(cfg: MapConfig, m: int, x: ChartPoint) -> np.ndarray:
    """Chain-rule product of one-step differentials along the orbit."""
    m = _signed_iterate(cfg, m)
    if abs(m) > CHAIN_LIMIT:
        raise ValueError(f"jacobian_chain limited to |m| <= {CHAIN_LIMIT}")
    sign = 1 if m >= 0 else -1
    J = None
    for _ in range(abs(m)):
        step = _one_step_jacobian(cfg, sign, x)
        J = step if J is None else step @ J
        x = _one_step(cfg, sign, x)
    if J is None:
        J = _jacobian_rows(cfg.dim, np.shape(x.phi1), 0.0, 0.0)
    return J


def example_apply(cfg: MapConfig, m: int, p: SpherePoint) -> SpherePoint:
    """m-th iterate of the selected S^1 x S^2 example map.

    example1: ``(lam, theta, z) -> (lam + alpha, theta + A(z) F(lam), z)``, poles
    rotate in ``lam``.  example2: ``(lam, theta, z) -> (lam + A(z) F(theta),
    theta + alpha, z)``, poles fixed.
    """
    if cfg.variant not in ("example1", "example2"):
        raise ValueError("example_apply needs variant example1 or example2")
    m = _signed_iterate(cfg, m)
    if isinstance(p, SpherePole):
        if cfg.variant == "example1":
            return SpherePole(circle_reduce(p.lam + m * cfg.a), p.sign)
        return p
    lam, theta, z = example_arrays(cfg, m, p.lam, p.theta, p.z)
    return SphereChart(float(lam), float(theta), float(z))


def example_arrays(cfg: MapConfig, m: int, lam, theta, z):
    """Vectorised chart branch of :func:`example_apply` (``m`` already signed)."""
    A = cfg.A.value(np.asarray(z, dtype=float))
    if cfg.variant == "example1":
        new_lam, inc = _shear(cfg, m, lam, A)
        return new_lam, circle_reduce(np.asarray(theta) + inc), np.asarray(z, dtype=float)
    new_theta, inc = _shear(cfg, m, theta, A)
    return circle_reduce(np.asarray(lam) + inc), new_theta, np.asarray(z, dtype=float)


@dataclass(frozen=True)
class FixedPointScan:
    fixed: list
    min_displacement: float
    n_points: int
    tolerance: float = FIXED_TOL


def sphere_grid(n: int):
    """Product grid ``lam, theta in {i/n}``, ``z`` at ``n`` cell centres of (-1, 1)."""
    g = np.arange(n) / n
    z = -1.0 + (2.0 * np.arange(n) + 1.0) / n
    lam, theta, zz = np.meshgrid(g, g, z, indexing="ij")
    return lam.ravel(), theta.ravel(), zz.ravel()


def fixed_point_scan(cfg: MapConfig, grid: int = 32, tol: float = FIXED_TOL) -> FixedPointScan:
    """Grid points (chart grid plus both pole circles) moved by at most ``tol``."""
    if cfg.variant not in ("example1", "example2"):
        raise ValueError("fixed_point_scan needs variant example1 or example2")
    lam, theta, z = sphere_grid(grid)
    nl, nt, nz = example_arrays(cfg, _signed_iterate(cfg, 1), lam, theta, z)
    disp = np.maximum(np.maximum(circle_dist(nl, lam), circle_dist(nt, theta)), np.abs(nz - z))
    fixed = [SphereChart(float(a), float(b), float(c))
             for a, b, c in zip(lam[disp <= tol], theta[disp <= tol], z[disp <= tol])]
    poles = [SpherePole(float(l_), s) for s in (1, -1) for l_ in np.arange(grid) / grid]
    pole_disp = []
    for p in poles:
        q = example_apply(cfg, 1, p)
        dp = circle_dist(q.lam, p.lam)
        pole_disp.append(dp)
        if dp <= tol:
            fixed.append(p)
    all_disp = np.concatenate([disp, np.asarray(pole_disp)])
    return FixedPointScan(fixed, float(all_disp.min()), int(all_disp.size), tol)
