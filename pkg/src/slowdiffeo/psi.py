"""Comparison functions psi: positive, increasing, unbounded and o(x)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("power", "log", "loglog", "table")


class InadmissiblePsi(ValueError):
    """Raised when a psi family violates one of its defining conditions."""


@dataclass(frozen=True)
class PsiSpec:
    kind: str
    beta: float | None = None
    table: tuple[tuple[float, float], ...] = ()

    @classmethod
    def parse(cls, text) -> PsiSpec:
        """Accept ``"power:0.5"``, ``"log"``, ``"loglog"`` or a mapping."""
        if isinstance(text, PsiSpec):
            return text
        if isinstance(text, dict):
            kind = text.get("kind")
            if kind == "power":
                return cls("power", beta=float(text["beta"]))
            if kind == "table":
                return cls("table", table=tuple((float(x), float(y)) for x, y in text["table"]))
            return cls(str(kind))
        text = str(text).strip()
        if text.startswith("power:"):
            return cls("power", beta=float(text.split(":", 1)[1]))
        return cls(text)

    def label(self) -> str:
        if self.kind == "power":
            return f"power:{self.beta!r}"
        return self.kind

    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "beta": self.beta}
        if self.kind == "table":
            return {"kind": "table", "table": [list(p) for p in self.table]}
        return {"kind": self.kind}


@dataclass(frozen=True)
class PsiReport:
    admissible: bool
    violated: str | None = None


def psi_validate(psi: PsiSpec, strict: bool = False) -> PsiReport:
    """Check admissibility; with ``strict`` raise :class:`InadmissiblePsi` instead."""
    violated = None
    if psi.kind not in KINDS:
        violated = f"unknown psi kind {psi.kind!r}"
    elif psi.kind == "power":
        b = psi.beta
        if b is None or not math.isfinite(b):
            violated = "power exponent missing"
        elif b >= 1.0:
            violated = "o(x) violated: power exponent must be < 1"
        elif b <= 0.0:
            violated = "unbounded increasing violated: power exponent must be > 0"
    elif psi.kind == "table":
        xs = np.array([p[0] for p in psi.table], dtype=float)
        ys = np.array([p[1] for p in psi.table], dtype=float)
        if len(xs) < 2:
            violated = "table needs at least two points"
        elif np.any(ys <= 0):
            violated = "positive violated"
        elif np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            violated = "increasing violated: table must be strictly increasing in both coordinates"
        else:
            tail = ys[len(ys) // 2 :] / xs[len(xs) // 2 :]
            if len(tail) >= 2 and np.any(np.diff(tail) >= 0):
                violated = "o(x) violated: psi(x)/x must decrease on the tail"
    report = PsiReport(violated is None, violated)
    if strict and not report.admissible:
        raise InadmissiblePsi(violated)
    return report


def psi_eval(psi: PsiSpec, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 1.0):
        raise ValueError("psi is evaluated for x >= 1 only")
    if psi.kind == "power":
        out = x**psi.beta
    elif psi.kind == "log":
        out = np.log1p(x)
    elif psi.kind == "loglog":
        out = np.log1p(np.log1p(x))
    elif psi.kind == "table":
        xs = np.array([p[0] for p in psi.table])
        ys = np.array([p[1] for p in psi.table])
        out = np.interp(x, xs, ys)
    else:
        raise InadmissiblePsi(f"unknown psi kind {psi.kind!r}")
    return float(out) if out.ndim == 0 else out
