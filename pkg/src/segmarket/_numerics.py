"""Scalar numerics shared by the solvers: lowest-maximizer search and quadrature."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQ = (3 - math.sqrt(5)) / 2

DEFAULT_GRID = 10_000
TIE_TOL = 1e-10
XTOL = 1e-12


class ConvergenceError(RuntimeError):
    """Raised when a numeric routine fails to produce a finite answer."""


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Maximize a unimodal ``f`` on ``[a, b]``; returns a point of the final bracket.

    The final bracket has width <= ``tol``.
    """
    h = b - a
    if h <= tol:
        return a if f(a) >= f(b) else b
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n):
        # ">=" keeps the left piece on ties, in line with lowest-maximizer semantics
        if yc >= yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    return c if yc >= yd else d


def _brackets(mask: np.ndarray) -> list[tuple[int, int]]:
    """Runs of consecutive True entries as inclusive index pairs."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    splits = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[splits + 1]))
    ends = np.concatenate((idx[splits], [idx[-1]]))
    return list(zip(starts.tolist(), ends.tolist()))


def lowest_maximizer(
    fun: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    *,
    dfun: Callable[[float], float] | None = None,
    n_grid: int = DEFAULT_GRID,
    tie_tol: float = TIE_TOL,
    xtol: float = XTOL,
) -> tuple[float, float]:
    """Smallest global maximizer of a vectorized ``fun`` on ``[lo, hi]``.

    Protocol: uniform grid scan, every run of grid points within ``tie_tol``
    (relative to the largest |value| on the grid) of the grid maximum becomes a
    bracket, each bracket is refined by golden section to width
    ``xtol * (hi - lo)``, and when ``dfun`` (the derivative) changes sign over a
    bracket its root is polished with Brent's method. Among the refined local
    maxima, the smallest one within tolerance of the best is returned.
    """
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        return lo, float(fun(np.array([lo]))[0])

    x = np.linspace(lo, hi, n_grid)
    y = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(y)):
        raise ConvergenceError(f"objective not finite on [{lo}, {hi}]")
    scale = float(np.max(np.abs(y)))
    ymax = float(np.max(y))
    tol = tie_tol * scale
    width = xtol * (hi - lo)

    def f1(p: float) -> float:
        return float(fun(np.array([p]))[0])

    candidates: list[tuple[float, float]] = []
    for i0, i1 in _brackets(y >= ymax - tol):
        a = x[max(i0 - 1, 0)]
        b = x[min(i1 + 1, n_grid - 1)]
        p = golden_section_max(f1, a, b, width)
        if a == lo and p - lo <= 2 * width:
            p = lo
        elif b == hi and hi - p <= 2 * width:
            p = hi
        elif dfun is not None:
            with np.errstate(all="ignore"):
                da, db = dfun(a), dfun(b)
            if np.isfinite(da) and np.isfinite(db) and da > 0 > db:
                root = brentq(dfun, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
                if f1(root) >= f1(p) - tol:
                    p = root
        candidates.append((p, f1(p)))

    best = max(v for _, v in candidates)
    p_star = min(p for p, v in candidates if v >= best - tol)
    return p_star, f1(p_star)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> float:
    """Adaptive Simpson quadrature of a scalar function on ``[a, b]``."""
    if b == a:
        return 0.0

    def simpson(fa, fm, fb, a_, b_):
        return (b_ - a_) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a_, b_, fa, fm, fb, whole, eps, depth):
        m = 0.5 * (a_ + b_)
        lm, rm = 0.5 * (a_ + m), 0.5 * (m + b_)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a_, m)
        right = simpson(fm, frm, fb, m, b_)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        return rec(a_, m, fa, flm, fm, left, eps / 2, depth - 1) + rec(
            m, b_, fm, frm, fb, right, eps / 2, depth - 1
        )

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def piecewise_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    breakpoints: Sequence[float] = (),
    tol: float = 1e-10,
) -> float:
    """Adaptive Simpson split at the interior ``breakpoints`` (kinks of ``f``)."""
    pts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    n = len(pts) - 1
    return sum(adaptive_simpson(f, pts[i], pts[i + 1], tol / n) for i in range(n))
