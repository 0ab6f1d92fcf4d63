"""Acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line (collected again in the pytest
terminal summary).  Run directly with ``python tests/test_acceptance.py`` to
get just those lines.
"""

import os
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from slowdiffeo import cli, geometry, growth, weyl
from slowdiffeo.config import load_config
from slowdiffeo.diffeo import (
    ChartPoint,
    MapConfig,
    SpherePole,
    f1_compose,
    f1_iterate_closed,
    fixed_point_scan,
    jacobian_chain,
    jacobian_closed,
)
from slowdiffeo.numeric import BumpProfile, FourierSeries, circle_dist
from slowdiffeo.rotation import alpha_make

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
THREADS = os.cpu_count() or 1
RESULTS: list[str] = []

MIXED = FourierSeries(((1, 0.3, 0.5), (3, -0.2, 0.1), (7, 0.05, -0.04)))
PAIRS = [
    (FourierSeries.sine(), alpha_make("golden")),
    (MIXED, alpha_make("silver")),
    (FourierSeries(((2, 0.4, 0.0), (5, 0.0, -0.3)), 0.25), alpha_make("sqrt3")),
]


def report(k: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {detail}"
    RESULTS.append(line)
    print(line, flush=True)
    assert ok, line


def random_points(rng, n, dim=1):
    u = rng.uniform(-1, 1, (4 * n, dim))
    u = u[np.sum(u * u, axis=1) < 0.98][:n]
    return ChartPoint(rng.random(n), rng.random(n), u)


def dist(p, q):
    return float(max(np.max(circle_dist(p.phi1, q.phi1)), np.max(circle_dist(p.phi2, q.phi2)),
                     np.max(np.abs(p.u - q.u))))


def test_c01_weyl_oracle():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(1000):
        F, a = PAIRS[i % 3]
        N, x = int(rng.integers(0, 10_001)), rng.random()
        d = abs(weyl.weyl_sum_closed(F, a, N, x) - weyl.weyl_sum_direct(F, a, N, x))
        worst = max(worst, d / (max(N, 1) * F.coeff_l1))
    dt = time.perf_counter() - t0
    report(1, worst <= 1e-9 and dt < 10, f"closed vs direct Weyl sums, scaled error {worst:.2e}, {dt:.2f} s")


def test_c02_cocycle():
    rng = np.random.default_rng(2)
    worst = 0.0
    for i in range(1000):
        F, a = PAIRS[i % 3]
        N, M = (int(v) for v in rng.integers(0, 1001, 2))
        x = rng.random()
        lhs = weyl.weyl_sum_closed(F, a, N + M, x)
        rhs = weyl.weyl_sum_closed(F, a, N, x) + weyl.weyl_sum_closed(F, a, M, x + N * a.alpha)
        worst = max(worst, abs(lhs - rhs))
    report(2, worst <= 1e-8, f"cocycle identity, max error {worst:.2e}")


def test_c03_w_le_wprime():
    bad, scans = [], 0
    for F, a in PAIRS[:2]:
        G = weyl.default_grid(F)
        for k in range(15):
            N = 2**k
            r = weyl.weyl_extrema(F, a, N, G)
            scans += 1
            if r.max_abs_W > r.max_abs_Wprime + 2 * np.pi * F.m_max * N / G:
                bad.append((F.m_max, N))
    report(3, not bad, f"max|W| <= max|W'| + slack on {scans} scans, violations {bad}")


def test_c04_closed_iterate():
    rng = np.random.default_rng(4)
    x = random_points(rng, 100)
    worst = 0.0
    for F, a in PAIRS:
        cfg = MapConfig(F, a)
        for m in (1, 2, 37, 500, 1000, -1000):
            worst = max(worst, dist(f1_iterate_closed(cfg, m, x), f1_compose(cfg, m, x)))
    report(4, worst <= 1e-8, f"closed iterate vs composition, max circle distance {worst:.2e}")


def test_c05_determinant():
    rng = np.random.default_rng(5)
    worst, count = 0.0, 0
    for F, a in PAIRS:
        for dim in (1, 2, 3):
            cfg = MapConfig(F, a, BumpProfile(dim))
            x = random_points(rng, 200, dim)
            for m in (-5000, -20, -1, 0, 1, 7, 100, 10_000, 100_000):
                d = np.linalg.det(jacobian_closed(cfg, m, x))
                worst = max(worst, float(np.max(np.abs(d - 1.0))))
                count += d.size
    report(5, worst <= 1e-10, f"|det - 1| max {worst:.2e} over {count} Jacobians")


def test_c06_chain_rule():
    rng = np.random.default_rng(6)
    worst = 0.0
    for i in range(200):
        F, a = PAIRS[i % 3]
        cfg = MapConfig(F, a, BumpProfile(1 + i % 2))
        x = random_points(rng, 1, cfg.dim)
        m = int(rng.integers(-50, 51))
        Jc, Jh = jacobian_closed(cfg, m, x), jacobian_chain(cfg, m, x)
        worst = max(worst, float(np.max(np.abs(Jc - Jh) / np.maximum(1.0, np.abs(Jh)))))
    report(6, worst <= 1e-7, f"chain rule vs closed form, max relative error {worst:.2e}")


def test_c07_growth_sanity():
    ns = growth.dyadic_schedule(2**10)
    ok, notes = True, []
    for F, a in PAIRS:
        cfg = MapConfig(F, a)
        g = growth.gamma_series(cfg, ns, threads=THREADS).gammas
        gi = growth.gamma_series(cfg.inverse(), ns, threads=THREADS).gammas
        g0 = growth.gamma_series(replace(cfg, F=FourierSeries.zero()), ns).gammas
        sub = all(g[i + 1] <= g[i] ** 2 * 1.01 for i in range(len(ns) - 1))
        good = bool(np.all(g0 == 1.0) and np.all(g >= 1.0) and np.array_equal(g, gi) and sub)
        ok &= good
        notes.append(f"m_max={F.m_max}:{'ok' if good else 'bad'}")
    report(7, ok, "zero-F ones, >= 1, symmetric, submultiplicative; " + ", ".join(notes))


def test_c08_bounded_control():
    cfg = MapConfig(FourierSeries.sine(), alpha_make("golden"))
    t0 = time.perf_counter()
    s = growth.gamma_series(cfg, list(range(1, 100_001)), threads=THREADS)
    dt = time.perf_counter() - t0
    g = s.gammas
    report(8, g.max() <= 20 and dt < 60,
           f"golden + sin, max Gamma_n over n <= 1e5 is {g.max():.4f} at n={int(s.ns[g.argmax()])}, "
           f"{dt:.1f} s on {THREADS} thread(s)")


def test_c09_slow_growth():
    run = load_config(CONFIGS / "resonant_power05.yaml")
    s = growth.gamma_series(run.map, run.schedule, run.grids, run.psi, threads=THREADS)
    g = dict(zip(s.ns.tolist(), s.gammas.tolist()))
    summ = s.summary()
    width = summ["sup_ratio_tail"] / summ["inf_ratio_tail"]
    ok = g[2**17] >= 2 * g[2**7] and width <= 1e3 and summ["verdict"] in ("band", "sub-psi")
    report(9, ok, f"resonant psi=n^0.5: Gamma(2^17)={g[2**17]:.2f}, Gamma(2^7)={g[2**7]:.2f}, "
                  f"tail ratio width {width:.3f}, verdict {summ['verdict']}")


def test_c10_flux_example1():
    worst = 0.0
    for a in (0.25, "golden", "silver", 0.0, {"family": "liouville", "depth": 3}):
        cfg = MapConfig(FourierSeries.sine(), alpha_make(a), variant="example1")
        r = geometry.flux_example1(cfg)
        worst = max(worst, float(circle_dist(r.value_mod1, cfg.a % 1.0)))
    golden = geometry.flux_example1(MapConfig(FourierSeries.sine(), alpha_make("golden"), variant="example1"))
    report(10, worst <= 1e-6, f"quadrature = alpha mod 1, max error {worst:.2e}; golden {golden.value_mod1:.10f}")


def test_c11_flux_example2():
    worst = 0.0
    for F, a in PAIRS[:2] + [(FourierSeries.cosine(3), alpha_make(0.25))]:
        r = geometry.flux_example2(MapConfig(F, a, variant="example2"))
        worst = max(worst, float(circle_dist(r.value, 0.0)))
    neg = geometry.flux_example2(MapConfig(FourierSeries.constant(1.0), alpha_make("golden"), variant="example2"))
    ok = worst <= 1e-8 and neg.flagged and circle_dist(neg.value, 0.0) > 1e-3
    report(11, ok, f"zero-mean F gives 0 mod 1 (max {worst:.2e}); constant F gives {neg.value:.6f}, flagged {neg.flagged}")


def test_c12_generator_loop():
    r = geometry.generator_loop_flux()
    report(12, abs(r.value - 1.0) <= 1e-8, f"generator loop flux {r.value:.12f}")


def test_c13_volume():
    cfg = MapConfig(FourierSeries.sine(), alpha_make("golden"))
    good = geometry.volume_pushforward_test(cfg, 100, 1_000_000, 16, seed=0, threads=THREADS)
    bad = geometry.volume_pushforward_test(cfg, 100, 1_000_000, 16, seed=0, threads=THREADS, broken=True)
    report(13, good.passed and not bad.passed,
           f"1e6 samples, 16^3 bins: map {good.max_bin_deviation_sigma:.2f} sigma, "
           f"broken {bad.max_bin_deviation_sigma:.2f} sigma")


def test_c14_fixed_points():
    ok, notes = True, []
    for a in ("golden", 0.25, "bronze"):
        base = MapConfig(FourierSeries.sine(), alpha_make(a))
        s2 = fixed_point_scan(replace(base, variant="example2"), 32)
        poles = sum(isinstance(p, SpherePole) for p in s2.fixed)
        s1 = fixed_point_scan(replace(base, variant="example1"), 32)
        bound = float(circle_dist(base.a, 0.0)) - 1e-10
        ok &= poles == 64 and not s1.fixed and s1.min_displacement >= bound
        notes.append(f"alpha={base.a:.4f}: poles fixed {poles}/64, example1 fixed {len(s1.fixed)}, "
                     f"min displacement {s1.min_displacement:.6f}")
    report(14, bool(ok), "; ".join(notes))


def test_c15_reproducibility(tmp_path, capsys):
    status = cli.main(["check", "--out", str(tmp_path / "check")])
    a, b = tmp_path / "a", tmp_path / "b"
    same = True
    for argv in (["growth", "--schedule", "dyadic:16384"], ["volcheck", "--samples", "300000", "--bins", "8"],
                 ["weyl", "--N", "5000"], ["orbit", "--steps", "50"], ["flux"]):
        cli.main([*argv, "--seed", "7", "--out", str(a), "--threads", "1"])
        cli.main([*argv, "--seed", "7", "--out", str(b), "--threads", "3"])
    capsys.readouterr()
    names = sorted(p.name for p in a.iterdir() if not p.name.endswith(".manifest.json"))
    for name in names:
        same &= (a / name).read_bytes() == (b / name).read_bytes()
    report(15, status == 0 and same and len(names) == 6,
           f"check exit {status}; {len(names)} outputs byte-identical across 1 and 3 threads: {same}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
