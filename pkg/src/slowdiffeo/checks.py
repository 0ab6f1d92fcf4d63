"""Invariant suite run by the ``check`` subcommand.

Each check returns a :class:`CheckResult`; sizes are kept small enough that
the whole suite finishes in well under a minute on one core.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from . import geometry, growth, weyl
from .diffeo import (
    ChartPoint,
    MapConfig,
    example_apply,
    f1_apply,
    f1_compose,
    f1_inverse,
    f1_iterate_closed,
    fixed_point_scan,
    jacobian_chain,
    jacobian_closed,
    SpherePole,
)
from .numeric import BumpProfile, FourierSeries, circle_dist, circle_reduce
from .psi import psi_eval, psi_validate


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return asdict(self)


def _pt_dist(p: ChartPoint, q: ChartPoint) -> float:
    return float(max(np.max(circle_dist(p.phi1, q.phi1)), np.max(circle_dist(p.phi2, q.phi2)),
                     np.max(np.abs(np.asarray(p.u) - np.asarray(q.u)))))


def _random_points(cfg: MapConfig, rng, n: int) -> ChartPoint:
    u = rng.uniform(-1, 1, (4 * n, cfg.dim))
    u = u[np.sum(u * u, axis=1) < 0.95][:n]
    return ChartPoint(rng.random(n), rng.random(n), u)


def check_circle(cfg, rng):
    x = rng.uniform(-50, 50, 1000)
    r = circle_reduce(x)
    ok = bool(np.all((r >= 0) & (r < 1)) and np.max(circle_dist(r, x)) < 1e-12)
    return CheckResult("circle_reduce range", ok, f"max residual {np.max(circle_dist(r, x)):.2e}")


def check_bump(cfg, rng):
    A = cfg.A if isinstance(cfg.A, BumpProfile) else BumpProfile(cfg.dim)
    pts = _random_points(cfg, rng, 200).u
    r = np.linalg.norm(pts, axis=1)
    val = A.value(pts)
    ok = bool(np.all(val[r <= A.r_plateau] == 1.0) and np.all(val[r >= A.r_support] == 0.0))
    h = 1e-6
    fd = np.stack([(A.value(pts + h * e) - A.value(pts - h * e)) / (2 * h) for e in np.eye(A.dim)], axis=-1)
    err = float(np.max(np.abs(fd - A.grad(pts))))
    ok = ok and err < 1e-5
    return CheckResult("bump plateau/support/gradient", ok, f"grad FD error {err:.2e}")


def check_psi(cfg, psi):
    rep = psi_validate(psi)
    xs = np.array([1.0, 10.0, 1e3, 1e6])
    vals = psi_eval(psi, xs)
    ok = rep.admissible and bool(np.all(np.diff(vals) > 0))
    return CheckResult("psi admissible", ok, rep.violated or psi.label())


def check_weyl_oracle(cfg, rng):
    F, a = cfg.F, cfg.alpha
    scale = max(F.coeff_l1 + abs(F.c0), 1e-300)
    worst = 0.0
    for _ in range(100):
        N = int(rng.integers(0, 2000))
        x = rng.random()
        d = abs(weyl.weyl_sum_closed(F, a, N, x) - weyl.weyl_sum_direct(F, a, N, x))
        worst = max(worst, d / (max(N, 1) * scale))
    return CheckResult("weyl closed vs direct", worst <= 1e-9, f"max scaled error {worst:.2e}")


def check_cocycle(cfg, rng):
    F, a = cfg.F, cfg.alpha
    worst = 0.0
    for _ in range(100):
        N, M = (int(v) for v in rng.integers(0, 2000, 2))
        x = rng.random()
        lhs = weyl.weyl_sum_closed(F, a, N + M, x)
        rhs = weyl.weyl_sum_closed(F, a, N, x) + weyl.weyl_sum_closed(F, a, M, x + N * a.alpha)
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("weyl cocycle identity", worst <= 1e-8, f"max error {worst:.2e}")


def check_w_le_wprime(cfg, rng):
    F = cfg.F
    if not F.is_zero_mean or F.is_zero:
        return CheckResult("max|W| <= max|W'|", True, "skipped: F not zero-mean or zero")
    G = weyl.default_grid(F)
    bad = []
    for k in range(11):
        N = 2**k
        r = weyl.weyl_extrema(F, cfg.alpha, N, G)
        slack = 2 * np.pi * F.m_max * N / G
        if r.max_abs_W > r.max_abs_Wprime + slack:
            bad.append(N)
    return CheckResult("max|W| <= max|W'|", not bad, f"violations at {bad}" if bad else "dyadic N <= 1024")


def _chart(cfg: MapConfig) -> MapConfig:
    return replace(cfg, variant="chart")


def check_iterates(cfg, rng):
    c = _chart(cfg)
    x = _random_points(c, rng, 20)
    worst = 0.0
    for m in (1, 7, 200, -3, -150):
        worst = max(worst, _pt_dist(f1_iterate_closed(c, m, x), f1_compose(c, m, x)))
    rt = _pt_dist(f1_apply(c, f1_inverse(c, x)), x)
    ok = worst <= 1e-8 and rt <= 1e-12
    return CheckResult("closed iterate vs composition", ok, f"max dist {worst:.2e}, round trip {rt:.2e}")


def check_group_law(cfg, rng):
    c = _chart(cfg)
    x = _random_points(c, rng, 20)
    worst = 0.0
    for _ in range(10):
        m, k = (int(v) for v in rng.integers(-500, 501, 2))
        lhs = f1_iterate_closed(c, m + k, x)
        rhs = f1_iterate_closed(c, m, f1_iterate_closed(c, k, x))
        worst = max(worst, _pt_dist(lhs, rhs))
    return CheckResult("iterate group law", worst <= 1e-8, f"max dist {worst:.2e}")


def check_jacobian(cfg, rng):
    c = _chart(cfg)
    x = _random_points(c, rng, 20)
    det_err = 0.0
    rel = 0.0
    for m in (0, 1, 2, 17, 50, -20):
        Jc = jacobian_closed(c, m, x)
        det_err = max(det_err, float(np.max(np.abs(np.linalg.det(Jc) - 1.0))))
        Jh = jacobian_chain(c, m, x)
        rel = max(rel, float(np.max(np.abs(Jc - Jh) / np.maximum(1.0, np.abs(Jh)))))
    ok = det_err <= 1e-10 and rel <= 1e-7
    return CheckResult("jacobian det and chain rule", ok, f"det error {det_err:.2e}, chain error {rel:.2e}")


def check_growth(cfg, grid):
    c = _chart(cfg)
    ns = [2**k for k in range(11)]
    zero = replace(c, F=FourierSeries.zero())
    g0 = growth.gamma_series(zero, ns, grid).gammas
    s = growth.gamma_series(c, ns, grid)
    si = growth.gamma_series(c.inverse(), ns, grid)
    g = s.gammas
    sym = bool(np.array_equal(g, si.gammas))
    sub = all(g[i + 1] <= g[i] * g[i] * 1.01 for i in range(len(ns) - 1))
    ok = bool(np.all(g0 == 1.0)) and bool(np.all(g >= 1.0)) and sym and sub
    return CheckResult("growth sanity", ok,
                       f"zero-F all ones {bool(np.all(g0 == 1.0))}, symmetric {sym}, submultiplicative {sub}")


def check_flux(cfg):
    msgs = []
    ok = True
    e1 = geometry.flux_example1(replace(cfg, variant="example1"))
    ok &= circle_dist(e1.value, cfg.a) <= 1e-6
    e1b = geometry.flux_example1(replace(cfg, variant="example1"), t_end=2.0)
    ok &= circle_dist(e1b.value, 2 * cfg.a) <= 1e-6
    msgs.append(f"ex1 {e1.value_mod1:.12g}")
    zm = cfg.F if cfg.F.is_zero_mean else FourierSeries.sine()
    e2 = geometry.flux_example2(replace(cfg, F=zm, variant="example2"))
    ok &= circle_dist(e2.value, 0.0) <= 1e-8
    neg = geometry.flux_example2(replace(cfg, F=FourierSeries.constant(1.0), variant="example2"))
    ok &= neg.flagged and circle_dist(neg.value, 0.0) > 1e-3
    loop = geometry.generator_loop_flux()
    ok &= abs(loop.value - 1.0) <= 1e-8
    msgs.append(f"ex2 {e2.value:.2e}, loop {loop.value:.12g}")
    return CheckResult("flux examples", bool(ok), "; ".join(msgs))


def check_volume(cfg, seed):
    c = _chart(cfg)
    good = geometry.volume_pushforward_test(c, 100, 200_000, 8, seed)
    again = geometry.volume_pushforward_test(c, 100, 200_000, 8, seed)
    bad = geometry.volume_pushforward_test(c, 100, 200_000, 8, seed, broken=True)
    ok = good.passed and not bad.passed and good == again
    return CheckResult("volume pushforward", ok,
                       f"map {good.max_bin_deviation_sigma:.2f} sigma, broken {bad.max_bin_deviation_sigma:.2f} sigma")


def check_fixed_points(cfg, sphere_grid):
    n = min(sphere_grid, 16)
    s2 = fixed_point_scan(replace(cfg, variant="example2"), n)
    poles = [p for p in s2.fixed if isinstance(p, SpherePole)]
    s1 = fixed_point_scan(replace(cfg, variant="example1"), n)
    bound = circle_dist(cfg.a, 0.0) - 1e-10
    ok = len(poles) == 2 * n and not s1.fixed and s1.min_displacement >= bound
    p = example_apply(replace(cfg, variant="example2"), 5, SpherePole(0.25, 1))
    ok = ok and p == SpherePole(0.25, 1)
    return CheckResult("fixed points", bool(ok),
                       f"example2 poles fixed {len(poles)}/{2 * n}; example1 min displacement {s1.min_displacement:.6g}")


def run_checks(run) -> list[CheckResult]:
    """All invariant checks for a :class:`~slowdiffeo.config.RunConfig`."""
    cfg = run.map
    rng = np.random.default_rng(run.seed)
    small_grid = growth.GridSpec(run.grids.phi_grid, min(run.grids.u_grid, 129))
    example_ok = cfg.dim == 1
    results = [
        check_circle(cfg, rng),
        check_bump(cfg, rng),
        check_psi(cfg, run.psi),
        check_weyl_oracle(cfg, rng),
        check_cocycle(cfg, rng),
        check_w_le_wprime(cfg, rng),
        check_iterates(cfg, rng),
        check_group_law(cfg, rng),
        check_jacobian(cfg, rng),
        check_growth(cfg, small_grid),
        check_volume(cfg, run.seed),
    ]
    if example_ok:
        results += [check_flux(cfg), check_fixed_points(cfg, run.sphere_grid)]
    return results
