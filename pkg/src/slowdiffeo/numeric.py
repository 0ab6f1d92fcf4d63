"""Circle arithmetic, trigonometric polynomials and smooth radial cutoffs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


def circle_reduce(x):
    """Reduce ``x`` modulo 1 into ``[0, 1)``.

    Accepts scalars or arrays.  ``np.mod`` can round tiny negative inputs up
    to exactly 1.0, so that case is folded back to 0.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("circle_reduce: non-finite input")
    r = np.mod(arr, 1.0)
    r = np.where(r >= 1.0, 0.0, r)
    if r.ndim == 0:
        return float(r)
    return r


def circle_dist(a, b):
    """Distance on R/Z: ``min(|a-b|, 1-|a-b|)`` after reduction."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 1.0)
    d = np.minimum(d, 1.0 - d)
    if d.ndim == 0:
        return float(d)
    return d


@dataclass(frozen=True)
class FourierSeries:
    """Finite real trigonometric polynomial on R/Z.

    ``F(x) = c0 + sum_m a_m cos(2 pi m x) + b_m sin(2 pi m x)`` with the
    harmonics stored as ``(m, a_m, b_m)`` triples, ``m`` strictly increasing.
    """

    harmonics: tuple[tuple[int, float, float], ...] = ()
    c0: float = 0.0

    def __post_init__(self):
        hs = tuple((int(m), float(a), float(b)) for m, a, b in self.harmonics)
        prev = 0
        for m, a, b in hs:
            if m <= prev:
                raise ValueError(
                    "FourierSeries: harmonic indices must be positive and strictly increasing"
                )
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("FourierSeries: non-finite coefficient")
            prev = m
        if not math.isfinite(self.c0):
            raise ValueError("FourierSeries: non-finite constant term")
        object.__setattr__(self, "harmonics", hs)
        object.__setattr__(self, "c0", float(self.c0))

    @classmethod
    def sine(cls, m: int = 1, amp: float = 1.0) -> FourierSeries:
        return cls(((m, 0.0, amp),))

    @classmethod
    def cosine(cls, m: int = 1, amp: float = 1.0) -> FourierSeries:
        return cls(((m, amp, 0.0),))

    @classmethod
    def constant(cls, c: float) -> FourierSeries:
        return cls((), c)

    @classmethod
    def zero(cls) -> FourierSeries:
        return cls()

    @property
    def is_zero_mean(self) -> bool:
        return self.c0 == 0.0

    @property
    def is_zero(self) -> bool:
        return self.c0 == 0.0 and all(a == 0.0 and b == 0.0 for _, a, b in self.harmonics)

    @property
    def m_max(self) -> int:
        return self.harmonics[-1][0] if self.harmonics else 0

    @property
    def coeff_l1(self) -> float:
        """``sum |a_m| + |b_m|`` over harmonics (the constant term excluded)."""
        return sum(abs(a) + abs(b) for _, a, b in self.harmonics)

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        m = np.array([h[0] for h in self.harmonics], dtype=np.int64)
        a = np.array([h[1] for h in self.harmonics], dtype=float)
        b = np.array([h[2] for h in self.harmonics], dtype=float)
        return m, a, b

    def derivative(self) -> FourierSeries:
        return FourierSeries(
            tuple((m, TWO_PI * m * b, -TWO_PI * m * a) for m, a, b in self.harmonics)
        )

    def shifted(self, s: float) -> FourierSeries:
        """Series of ``x -> F(x + s)``."""
        out = []
        for m, a, b in self.harmonics:
            c, sn = math.cos(TWO_PI * m * s), math.sin(TWO_PI * m * s)
            out.append((m, a * c + b * sn, b * c - a * sn))
        return FourierSeries(tuple(out), self.c0)

    def __neg__(self) -> FourierSeries:
        return FourierSeries(tuple((m, -a, -b) for m, a, b in self.harmonics), -self.c0)

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.c0)
        for m, a, b in self.harmonics:
            ph = TWO_PI * np.mod(m * x, 1.0)
            out = out + a * np.cos(ph) + b * np.sin(ph)
        return float(out) if out.ndim == 0 else out

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for m, a, b in self.harmonics:
            ph = TWO_PI * np.mod(m * x, 1.0)
            out = out + TWO_PI * m * (b * np.cos(ph) - a * np.sin(ph))
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"c0": self.c0, "harmonics": [list(h) for h in self.harmonics]}


def _g(s):
    # exp(-1/s) for s > 0, 0 otherwise
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(s > 0.0, np.exp(-1.0 / np.where(s > 0.0, s, 1.0)), 0.0)


def smoothstep(t):
    """C-infinity step ``h(t) = g(t) / (g(t) + g(1-t))``, clamped to [0, 1]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    gt, g1 = _g(t), _g(1.0 - t)
    return gt / (gt + g1)


def smoothstep_deriv(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    inside = (t > 0.0) & (t < 1.0)
    ts = np.where(inside, t, 0.5)
    gt, g1 = _g(ts), _g(1.0 - ts)
    num = gt * g1 * (1.0 / ts**2 + 1.0 / (1.0 - ts) ** 2)
    return np.where(inside, num / (gt + g1) ** 2, 0.0)


def as_disc_points(u, dim: int) -> np.ndarray:
    """Coerce ``u`` to shape ``(..., dim)``; for ``dim == 1`` bare scalars/vectors are points."""
    u = np.asarray(u, dtype=float)
    if dim == 1 and (u.ndim == 0 or u.shape[-1] != 1):
        return u[..., None]
    if u.ndim == 0 or u.shape[-1] != dim:
        raise ValueError(f"expected trailing dimension {dim}, got shape {u.shape}")
    return u


@dataclass(frozen=True)
class BumpProfile:
    """Radial cutoff ``A`` on the open unit disc of dimension ``dim``.

    ``A = 1`` on ``|u| <= r_plateau``, ``A = 0`` on ``|u| >= r_support``, with
    a smoothstep transition in between.
    """

    dim: int = 1
    r_plateau: float = 0.3
    r_support: float = 0.6
    _width: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError("bump dim must be a positive integer")
        if not (0.0 < self.r_plateau < self.r_support < 1.0):
            raise ValueError(
                "bump radii: need 0 < r_plateau < r_support < 1, got "
                f"{self.r_plateau}, {self.r_support}"
            )
        object.__setattr__(self, "_width", self.r_support - self.r_plateau)

    def _radius(self, u) -> tuple[np.ndarray, np.ndarray]:
        u = as_disc_points(u, self.dim)
        r = np.sqrt(np.sum(u * u, axis=-1))
        if np.any(r >= 1.0):
            raise ValueError("point outside the open disc |u| < 1")
        return u, r

    def value(self, u):
        _, r = self._radius(u)
        out = smoothstep((self.r_support - r) / self._width)
        return float(out) if out.ndim == 0 else out

    __call__ = value

    def grad(self, u) -> np.ndarray:
        u, r = self._radius(u)
        dh = smoothstep_deriv((self.r_support - r) / self._width)
        safe_r = np.where(r > 0.0, r, 1.0)
        scale = np.where(r > 0.0, -dh / (self._width * safe_r), 0.0)
        return scale[..., None] * u

    def to_dict(self) -> dict:
        return {"dim": self.dim, "r_plateau": self.r_plateau, "r_support": self.r_support}


@dataclass(frozen=True)
class ZeroBump:
    """The degenerate cutoff ``A = 0``; same interface as :class:`BumpProfile`."""

    dim: int = 1

    def value(self, u):
        out = np.zeros(as_disc_points(u, self.dim).shape[:-1])
        return float(out) if out.ndim == 0 else out

    __call__ = value

    def grad(self, u) -> np.ndarray:
        return np.zeros(as_disc_points(u, self.dim).shape)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "zero": True}
