"""Rotation numbers: continued-fraction bookkeeping and construction families.

Also houses :func:`resonant_pair`, a heuristic builder for ``(F, alpha)``
pairs whose Weyl-sum derivatives grow roughly like a prescribed ``psi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .numeric import TWO_PI, FourierSeries
from .psi import PsiSpec, psi_eval, psi_validate

# Consecutive convergents are kept while q_k * q_{k+1} <= 2**50, so that the
# bound |alpha - p_k/q_k| < 1/(q_k q_{k+1}) stays above the rounding of alpha.
QQ_LIMIT = 2**50
MIN_CONVERGENTS = 20
# alpha is flagged degenerate when it is within RATIONAL_TOL of some p/q, q <= RATIONAL_QMAX
RATIONAL_QMAX = 10**6
RATIONAL_TOL = 4 * 2.0**-52

QUADRATIC = {
    # name: (value, pre-period partial quotients, periodic block)
    "golden": ((math.sqrt(5.0) - 1.0) / 2.0, (), (1,)),
    "silver": (math.sqrt(2.0) - 1.0, (), (2,)),
    "bronze": ((math.sqrt(13.0) - 3.0) / 2.0, (), (3,)),
    "sqrt3": (math.sqrt(3.0) - 1.0, (), (1, 2)),
}


@dataclass(frozen=True)
class RotationNumber:
    alpha: float
    family: str
    params: tuple = ()
    convergents: tuple[tuple[int, int], ...] = ()
    degenerate: bool = False

    def __float__(self) -> float:
        return self.alpha

    def to_dict(self) -> dict:
        d = {"family": self.family, "alpha": self.alpha}
        d.update(dict(self.params))
        return d


def convergents_from_quotients(quotients) -> list[tuple[int, int]]:
    """Convergents ``p_k/q_k`` of ``[0; a_1, a_2, ...]`` (q_k increasing)."""
    out = []
    pm, qm, pc, qc = 1, 0, 0, 1
    for a in quotients:
        pm, qm, pc, qc = pc, qc, a * pc + pm, a * qc + qm
        out.append((pc, qc))
    return out


def cf_quotients(x: Fraction, limit: int = 200) -> list[int]:
    """Partial quotients of a rational in ``[0, 1)``, leading 0 omitted."""
    out = []
    frac = x - math.floor(x)
    while frac != 0 and len(out) < limit:
        inv = 1 / frac
        a = math.floor(inv)
        out.append(a)
        frac = inv - a
    return out


def _truncate(convs, limit=QQ_LIMIT):
    # stop at the first pair whose product exceeds the limit; the kept tail
    # entry serves as successor for the bound on the one before it
    out = []
    for i, (p, q) in enumerate(convs):
        out.append((p, q))
        if i + 1 < len(convs) and q * convs[i + 1][1] > limit and len(out) >= 2:
            break
    return tuple(out)


def is_near_rational(alpha: float) -> bool:
    approx = Fraction(alpha).limit_denominator(RATIONAL_QMAX)
    return abs(float(Fraction(alpha) - approx)) <= RATIONAL_TOL


def _from_float(alpha: float, family: str, params=()) -> RotationNumber:
    exact = Fraction(alpha)
    convs = convergents_from_quotients(cf_quotients(exact))
    return RotationNumber(
        alpha=alpha,
        family=family,
        params=tuple(params),
        convergents=_truncate(convs),
        degenerate=is_near_rational(alpha),
    )


def periodic_alpha(prefix, period) -> float:
    """Value of ``[0; prefix, period, period, ...]``.

    The periodic tail ``y = [period; y]`` solves a quadratic built from the
    continuant matrix of one period.
    """
    prefix, period = list(prefix), list(period)
    P, Pp, Q, Qp = 1, 0, 0, 1
    for a in period:
        P, Pp, Q, Qp = a * P + Pp, P, a * Q + Qp, Q
    # y = (P y + Pp) / (Q y + Qp)  ->  Q y^2 + (Qp - P) y - Pp = 0
    y = ((P - Qp) + math.sqrt((P - Qp) ** 2 + 4 * Q * Pp)) / (2 * Q)
    if not prefix:
        return 1.0 / y
    convs = convergents_from_quotients(prefix)
    pk, qk = convs[-1]
    pk1, qk1 = (0, 1) if len(convs) == 1 else convs[-2]
    return (pk * y + pk1) / (qk * y + qk1)


def _periodic_convergents(prefix, period):
    quotients = list(prefix)
    while True:
        convs = convergents_from_quotients(quotients)
        if len(convs) >= MIN_CONVERGENTS and convs[-2][1] * convs[-1][1] > QQ_LIMIT:
            return _truncate(convs)
        quotients.extend(period)


def alpha_make(spec) -> RotationNumber:
    """Build a rotation number from a family spec.

    ``spec`` may be a float (explicit value), a name from ``QUADRATIC``, or a
    dict with ``family`` in ``{"explicit", "quadratic", "liouville",
    "periodic"}``.  Explicit values that sit on a small-denominator rational
    are accepted but marked ``degenerate``.
    """
    if isinstance(spec, RotationNumber):
        return spec
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        spec = {"family": "explicit", "value": float(spec)}
    elif isinstance(spec, str):
        spec = {"family": "quadratic", "name": spec}
    if not isinstance(spec, dict):
        raise ValueError(f"unrecognised alpha spec: {spec!r}")

    family = spec.get("family", "explicit")
    if family == "explicit":
        value = float(spec["value"])
        if not (0.0 <= value < 1.0) or not math.isfinite(value):
            raise ValueError(f"alpha must lie in [0, 1), got {value}")
        return _from_float(value, "explicit", (("value", value),))

    if family in ("quadratic", "quadratic-irrational"):
        name = spec.get("name", "golden")
        if name not in QUADRATIC:
            raise ValueError(f"unknown quadratic irrational {name!r}; choose from {sorted(QUADRATIC)}")
        value, prefix, period = QUADRATIC[name]
        return RotationNumber(
            alpha=value,
            family="quadratic-irrational",
            params=(("name", name),),
            convergents=_periodic_convergents(prefix, period),
            degenerate=False,
        )

    if family == "periodic":
        prefix = tuple(int(a) for a in spec.get("prefix", ()))
        period = tuple(int(a) for a in spec["period"])
        if not period or any(a < 1 for a in prefix + period):
            raise ValueError("partial quotients must be positive integers")
        value = periodic_alpha(prefix, period)
        return RotationNumber(
            alpha=value,
            family="quadratic-irrational",
            params=(("prefix", list(prefix)), ("period", list(period))),
            convergents=_periodic_convergents(prefix, period),
            degenerate=False,
        )

    if family == "liouville":
        base = int(spec.get("base", 2))
        depth = int(spec.get("depth", 3))
        if base < 2:
            raise ValueError("liouville base must be >= 2")
        if depth < 1:
            raise ValueError("liouville depth must be >= 1")
        if math.factorial(depth) * math.log2(base) > 1022:
            raise ValueError(
                f"liouville depth {depth} too large: base**(depth!) leaves the double exponent range"
            )
        exact = sum(Fraction(1, base ** math.factorial(k)) for k in range(1, depth + 1))
        value = float(exact)
        if value >= 1.0:
            raise ValueError("liouville value must lie in (0, 1)")
        return _from_float(value, "liouville", (("base", base), ("depth", depth)))

    raise ValueError(f"unknown alpha family {family!r}")


def resonant_pair(psi: PsiSpec, depth: int, base: int = 8) -> tuple[FourierSeries, RotationNumber]:
    """Heuristic ``(F, alpha)`` whose Weyl-sum derivative tracks ``psi``.

    alpha has continued fraction ``[0; base, ..., base, 1, 1, ...]`` with
    ``depth + 1`` copies of ``base``, so its convergent denominators
    ``q_1 < ... < q_{depth+1}`` grow geometrically.  Then
    ``F(x) = sum_j a_j sin(2 pi q_j x)`` with
    ``a_j = min(1, psi(q_{j+1}) / (2 pi q_j q_{j+1}))``, rescaled so that
    ``sum a_j <= 1``.  Harmonic ``j`` resonates coherently until
    ``N ~ q_{j+1}``, where its derivative sum reaches about ``psi(q_{j+1})``.

    This does not reproduce any existence proof; it is a tunable family whose
    growth is checked empirically.
    """
    psi_validate(psi, strict=True)
    depth = int(depth)
    if depth < 1:
        raise ValueError("resonant_pair depth must be >= 1")
    if base < 2:
        raise ValueError("resonant_pair base must be >= 2")
    prefix = (base,) * (depth + 1)
    q = [qk for _, qk in convergents_from_quotients(prefix)]
    if q[depth - 1] * q[depth] > 2**50:
        raise ValueError(
            f"depth {depth} too large for double precision: q_J * q_(J+1) = "
            f"{q[depth - 1] * q[depth]:.3g} exceeds 2**50"
        )
    alpha = alpha_make({"family": "periodic", "prefix": list(prefix), "period": [1]})
    coeffs = [
        min(1.0, psi_eval(psi, q[j + 1]) / (TWO_PI * q[j] * q[j + 1])) for j in range(depth)
    ]
    total = sum(coeffs)
    if total > 1.0:
        coeffs = [c / total for c in coeffs]
    F = FourierSeries(tuple((q[j], 0.0, coeffs[j]) for j in range(depth)))
    return F, alpha
