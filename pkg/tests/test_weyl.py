import math

import numpy as np
import pytest

from slowdiffeo import weyl
from slowdiffeo.numeric import FourierSeries
from slowdiffeo.rotation import alpha_make

SIN = FourierSeries.sine()
GOLD = alpha_make("golden")
MIXED = FourierSeries(((1, 0.3, 0.5), (3, -0.2, 0.1), (7, 0.05, -0.04)))


def test_direct_examples():
    assert weyl.weyl_sum_direct(SIN, GOLD, 0, 0.3) == 0.0
    assert weyl.weyl_sum_direct(SIN, GOLD, 1, 0.25) == pytest.approx(1.0)
    assert weyl.weyl_sum_direct(SIN, 0.5, 2, 0.25) == pytest.approx(0.0, abs=1e-15)


def test_closed_single_term(rng):
    for x in rng.random(10):
        assert weyl.weyl_sum_closed(MIXED, GOLD, 1, x) == pytest.approx(MIXED.value(x), abs=1e-14)


def test_closed_matches_direct_large_n():
    a = weyl.weyl_sum_closed(SIN, GOLD, 10_000, 0.0)
    b = weyl.weyl_sum_direct(SIN, GOLD, 10_000, 0.0)
    assert abs(a - b) <= 1e-6


def test_resonant_fallback():
    # m alpha is an integer for m = 4 at alpha = 0.25
    F = FourierSeries(((4, 0.0, 0.7),))
    x = 0.03
    N = 37
    assert weyl.weyl_sum_closed(F, 0.25, N, x) == pytest.approx(N * F.value(x), rel=1e-12)
    assert weyl.weyl_deriv(F, 0.25, N, x) == pytest.approx(N * F.deriv(x), rel=1e-12)


def test_deriv_examples():
    assert weyl.weyl_deriv(SIN, GOLD, 0, 0.1) == 0.0
    assert weyl.weyl_deriv(SIN, GOLD, 1, 0.0) == pytest.approx(2 * math.pi)
    assert weyl.weyl_deriv(SIN, GOLD, 1, 0.0, method="direct") == pytest.approx(2 * math.pi)


def test_constant_term_counts_n():
    F = FourierSeries(((2, 0.1, 0.2),), c0=0.5)
    for N in (0, 1, 13):
        d = weyl.weyl_sum_direct(F, GOLD, N, 0.4)
        assert weyl.weyl_sum_closed(F, GOLD, N, 0.4) == pytest.approx(d, abs=1e-12)


def test_cocycle(rng):
    for _ in range(200):
        N, M = (int(v) for v in rng.integers(0, 1000, 2))
        x = rng.random()
        lhs = weyl.weyl_sum_closed(MIXED, GOLD, N + M, x)
        rhs = weyl.weyl_sum_closed(MIXED, GOLD, N, x) + weyl.weyl_sum_closed(MIXED, GOLD, M, x + N * GOLD.alpha)
        assert abs(lhs - rhs) <= 1e-8


def test_extrema_examples():
    r = weyl.weyl_extrema(SIN, GOLD, 1)
    assert r.max_abs_W == pytest.approx(1.0)
    assert r.max_abs_Wprime == pytest.approx(2 * math.pi)
    r = weyl.weyl_extrema(SIN, GOLD, 1000)
    assert r.max_abs_W <= 1.08 and r.max_abs_Wprime <= 6.8
    # argmax is a grid point achieving the maximum
    x, _, wp = weyl.grid_values(SIN, GOLD, 1000, r.grid_size)
    assert abs(wp[int(round(r.argmax_x * r.grid_size))]) == r.max_abs_Wprime


def test_extrema_tie_break_lowest_index():
    # |cos(2 pi x)| peaks at x = 0 and x = 0.5
    r = weyl.weyl_extrema(FourierSeries.cosine(), GOLD, 1, 4096)
    assert r.max_abs_W == pytest.approx(1.0)
    r2 = weyl.weyl_extrema(FourierSeries.sine(), GOLD, 1, 4096)
    assert r2.argmax_x == 0.0


def test_grid_rule():
    F = FourierSeries(((3000, 0.0, 1.0),))
    assert weyl.default_grid(F) == 64 * 3000
    assert weyl.default_grid(SIN) == 4096
    with pytest.raises(ValueError):
        weyl.weyl_extrema(F, GOLD, 10, 4096)


def test_zero_mean_transfer_and_zero():
    for N in (1, 10, 1000, 12345):
        _, w, _ = weyl.grid_values(MIXED, GOLD, N)
        assert abs(np.mean(w)) <= 1e-8 * N
        assert weyl.has_zero_on_grid(w)


def test_w_le_wprime_with_slack():
    G = weyl.default_grid(MIXED)
    for k in range(15):
        N = 2**k
        r = weyl.weyl_extrema(MIXED, GOLD, N, G)
        assert r.max_abs_W <= r.max_abs_Wprime + 2 * math.pi * MIXED.m_max * N / G


def test_scan_matches_pointwise():
    ns = [1, 5, 77, 1000]
    stats = weyl.scan_extrema(MIXED, GOLD, ns, 4096)
    x = np.arange(4096) / 4096
    for i, n in enumerate(ns):
        w = weyl.weyl_sum_direct(MIXED, GOLD, n, x)
        assert stats["max_w"][i] == pytest.approx(np.max(np.abs(w)), abs=1e-10)


def test_shift_back_coefficients(rng):
    n = 123
    x = rng.random(20)
    _, wp_shift = None, None
    c = weyl.harmonic_coefficients(MIXED, GOLD, [n], shift_back=True)[0]
    ms, _, _ = MIXED.arrays
    val = sum(np.real(c[h] * np.exp(2j * np.pi * m * x)) for h, m in enumerate(ms))
    want = weyl.weyl_sum_direct(MIXED, GOLD, n, x - n * GOLD.alpha)
    assert np.allclose(val, want, atol=1e-10)
