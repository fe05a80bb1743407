"""Valuation and location distributions.

Every solver consumes a :class:`Distribution`: a CDF, a density (continuous
kinds only), and the support ``[support_lo, support_hi]``. Instances are
frozen dataclasses; all methods are pure and vectorized over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np
from scipy import special

from ._numerics import adaptive_simpson, piecewise_simpson

STRUCT_TOL = 1e-12
CHECK_TOL = 1e-9


class DistributionError(ValueError):
    """Invalid distribution parameters or an operation unsupported by a kind."""


def _as_array(x):
    return np.asarray(x, dtype=float)


def _ret(out, x):
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class Distribution:
    """Base class. Subclasses set ``kind`` and implement ``_cdf``/``_pdf``."""

    kind: ClassVar[str] = ""
    continuous: ClassVar[bool] = True

    @property
    def support_lo(self) -> float:
        raise NotImplementedError

    @property
    def support_hi(self) -> float:
        raise NotImplementedError

    def cdf(self, x):
        x = _as_array(x)
        xs = np.atleast_1d(x)
        out = np.where(xs >= self.support_hi, 1.0, 0.0)
        inside = (xs >= self.support_lo) & (xs < self.support_hi)
        if np.any(inside):
            out[inside] = self._cdf(xs[inside])
        out = np.clip(out, 0.0, 1.0)
        return _ret(out.reshape(x.shape) if x.ndim else out[0], x)

    def pdf(self, x):
        if not self.continuous:
            raise DistributionError(f"{self.kind} distribution has no density")
        x = _as_array(x)
        xs = np.atleast_1d(x)
        out = np.zeros_like(xs)
        inside = (xs >= self.support_lo) & (xs <= self.support_hi)
        if np.any(inside):
            with np.errstate(divide="ignore", invalid="ignore"):
                out[inside] = self._pdf(xs[inside])
        return _ret(out.reshape(x.shape) if x.ndim else out[0], x)

    def quantile(self, q, iters: int = 200):
        """Smallest x with ``cdf(x) >= q``, by vectorized bisection."""
        q = _as_array(q)
        qs = np.atleast_1d(q)
        if np.any((qs < 0) | (qs > 1)):
            raise DistributionError("quantile level outside [0, 1]")
        lo = np.full_like(qs, self.support_lo)
        hi = np.full_like(qs, self.support_hi)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            up = np.asarray(self.cdf(mid)) >= qs
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
            if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(hi))):
                break
        out = np.where(qs <= 0.0, self.support_lo, hi)
        return _ret(out if q.ndim else out[0], q)

    def breakpoints(self) -> tuple[float, ...]:
        """Points where the CDF has kinks (piecewise kinds); used by quadrature."""
        return ()

    def partial_expectation(self, a: float, b: float, tol: float = 1e-12) -> float:
        """``E[X; a < X <= b]`` via integration by parts on the CDF."""
        a = max(a, self.support_lo)
        b = min(b, self.support_hi)
        if b <= a:
            return 0.0
        integral = piecewise_simpson(lambda x: float(self.cdf(x)), a, b, self.breakpoints(), tol)
        return b * float(self.cdf(b)) - a * float(self.cdf(a)) - integral

    def mean(self) -> float:
        return self.support_lo * float(self.cdf(self.support_lo)) + self.partial_expectation(
            self.support_lo, self.support_hi
        )

    def reflect(self) -> "Distribution":
        """Law of ``-X``."""
        return Reflected(self)

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: float = 0.0
    hi: float = 1.0
    kind: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.hi > self.lo):
            raise DistributionError(f"uniform needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def support_lo(self) -> float:
        return self.lo

    @property
    def support_hi(self) -> float:
        return self.hi

    def _cdf(self, x):
        return (x - self.lo) / (self.hi - self.lo)

    def _pdf(self, x):
        return np.full_like(x, 1.0 / (self.hi - self.lo))

    def quantile(self, q, iters: int = 200):
        q = _as_array(q)
        if np.any((q < 0) | (q > 1)):
            raise DistributionError("quantile level outside [0, 1]")
        return _ret(self.lo + q * (self.hi - self.lo), q)

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Power(Distribution):
    """``F(v) = v**k`` on ``[0, 1]``."""

    k: float = 1.0
    kind: ClassVar[str] = "power"

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise DistributionError(f"power law needs k > 0, got {self.k}")

    @property
    def support_lo(self) -> float:
        return 0.0

    @property
    def support_hi(self) -> float:
        return 1.0

    @property
    def params(self) -> "PowerLawParams":
        return PowerLawParams(self.k)

    def _cdf(self, x):
        return np.power(x, self.k)

    def _pdf(self, x):
        if self.k == 1.0:
            return np.ones_like(x)
        return self.k * np.power(x, self.k - 1.0)

    def to_dict(self):
        return {"kind": self.kind, "k": self.k}


@dataclass(frozen=True)
class PowerLawParams:
    """Exponent ``k`` and the truncation ratio ``gamma = (k+1)**(1/k)``.

    Optimal price against ``F(v)=v**k`` truncated to ``[0, v]`` is ``v / gamma``.
    """

    k: float

    @property
    def gamma(self) -> float:
        return (self.k + 1.0) ** (1.0 / self.k)


@dataclass(frozen=True)
class Beta(Distribution):
    """Beta(a, b) rescaled from ``[0, 1]`` to ``[lo, hi]``."""

    a: float = 2.0
    b: float = 2.0
    lo: float = 0.0
    hi: float = 1.0
    kind: ClassVar[str] = "beta"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DistributionError(f"beta needs a, b > 0, got ({self.a}, {self.b})")
        if not self.hi > self.lo:
            raise DistributionError(f"beta needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def support_lo(self) -> float:
        return self.lo

    @property
    def support_hi(self) -> float:
        return self.hi

    def _unit(self, x):
        return (x - self.lo) / (self.hi - self.lo)

    def _cdf(self, x):
        return special.betainc(self.a, self.b, np.clip(self._unit(x), 0.0, 1.0))

    def _pdf(self, x):
        z = np.clip(self._unit(x), 0.0, 1.0)
        log_norm = special.betaln(self.a, self.b) + math.log(self.hi - self.lo)
        with np.errstate(divide="ignore"):
            return np.exp((self.a - 1) * np.log(z) + (self.b - 1) * np.log1p(-z) - log_norm)

    def cdf_by_quadrature(self, x: float, tol: float = 1e-12) -> float:
        """CDF from adaptive Simpson on the density; independent of ``betainc``."""
        x = min(max(x, self.lo), self.hi)
        return adaptive_simpson(lambda s: float(self.pdf(s)), self.lo, x, tol)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class PiecewiseLinear(Distribution):
    """Atomless law with a piecewise-linear CDF through ``knots``.

    ``knots`` is a sequence of ``(value, cumulative_prob)`` pairs, values
    strictly increasing, probabilities nondecreasing from 0 to 1.
    """

    knots: tuple[tuple[float, float], ...] = ((0.0, 0.0), (1.0, 1.0))
    kind: ClassVar[str] = "piecewise"
    _v: np.ndarray = field(init=False, repr=False, compare=False)
    _f: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        knots = tuple((float(v), float(p)) for v, p in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 2:
            raise DistributionError("piecewise CDF needs at least two knots")
        v = np.array([k[0] for k in knots])
        f = np.array([k[1] for k in knots])
        if np.any(np.diff(v) <= 0):
            raise DistributionError("knot values must be strictly increasing")
        if np.any(np.diff(f) < 0):
            raise DistributionError("knot probabilities must be nondecreasing")
        if abs(f[0]) > STRUCT_TOL or abs(f[-1] - 1.0) > STRUCT_TOL:
            raise DistributionError("knot probabilities must run from 0 to 1")
        f[0], f[-1] = 0.0, 1.0
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "_f", f)

    @classmethod
    def from_samples(cls, samples, support: tuple[float, float] | None = None) -> "PiecewiseLinear":
        """Empirical CDF interpolated linearly between order statistics.

        Without ``support`` the extreme samples become the support ends. With
        it, distinct values get mid-rank plotting positions and the CDF runs
        from 0 at ``support[0]`` to 1 at ``support[1]``.
        """
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size < 2 or not np.all(np.isfinite(x)):
            raise DistributionError("need at least two finite samples")
        values, counts = np.unique(x, return_counts=True)
        ends = np.cumsum(counts) - 1
        starts = ends - counts + 1
        if support is None:
            if values.size < 2:
                raise DistributionError("samples must contain at least two distinct values")
            # each distinct value sits at the mean rank of its ties
            probs = 0.5 * (starts + ends) / (x.size - 1)
            probs[0], probs[-1] = 0.0, 1.0
            return cls(tuple(zip(values.tolist(), probs.tolist())))
        lo, hi = float(support[0]), float(support[1])
        if not lo < hi or values[0] < lo or values[-1] > hi:
            raise DistributionError(f"samples fall outside the support [{lo}, {hi}]")
        probs = (0.5 * (starts + ends) + 0.5) / x.size
        keep = (values > lo) & (values < hi)
        knots = [(lo, 0.0)] + list(zip(values[keep].tolist(), probs[keep].tolist())) + [(hi, 1.0)]
        return cls(tuple(knots))

    @property
    def support_lo(self) -> float:
        return float(self._v[0])

    @property
    def support_hi(self) -> float:
        return float(self._v[-1])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self._f) / np.diff(self._v)

    def breakpoints(self):
        return tuple(self._v[1:-1].tolist())

    def _cdf(self, x):
        return np.interp(x, self._v, self._f)

    def _pdf(self, x):
        slopes = self.slopes
        j = np.clip(np.searchsorted(self._v, x, side="right") - 1, 0, slopes.size - 1)
        out = slopes[j]
        # at an interior knot the slope is undefined: report the mean of both sides
        at_knot = np.isin(x, self._v[1:-1])
        if np.any(at_knot):
            out = np.where(at_knot, 0.5 * (slopes[j] + slopes[np.maximum(j - 1, 0)]), out)
        return out

    def to_dict(self):
        return {"kind": self.kind, "knots": [list(k) for k in self.knots]}


@dataclass(frozen=True)
class Discrete(Distribution):
    """Finite support with strictly positive masses (no density)."""

    support: tuple[float, ...] = (0.0,)
    masses: tuple[float, ...] = (1.0,)
    kind: ClassVar[str] = "discrete"
    continuous: ClassVar[bool] = False

    def __post_init__(self):
        support = tuple(float(v) for v in self.support)
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "masses", masses)
        if len(support) != len(masses) or not support:
            raise DistributionError("support and masses must be non-empty and of equal length")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise DistributionError("support must be strictly increasing")
        if any(m <= 0 for m in masses):
            raise DistributionError("masses must be strictly positive")
        if abs(math.fsum(masses) - 1.0) > STRUCT_TOL:
            raise DistributionError(f"masses sum to {math.fsum(masses)!r}, not 1")

    @property
    def support_lo(self) -> float:
        return self.support[0]

    @property
    def support_hi(self) -> float:
        return self.support[-1]

    def cdf(self, x):
        x = _as_array(x)
        cum = np.concatenate(([0.0], np.cumsum(self.masses)))
        cum[-1] = 1.0
        out = cum[np.searchsorted(np.array(self.support), x, side="right")]
        return _ret(out, x)

    def quantile(self, q, iters: int = 200):
        q = _as_array(q)
        if np.any((q < 0) | (q > 1)):
            raise DistributionError("quantile level outside [0, 1]")
        cum = np.cumsum(self.masses)
        cum[-1] = 1.0
        idx = np.minimum(np.searchsorted(cum, q - STRUCT_TOL, side="left"), len(cum) - 1)
        return _ret(np.array(self.support)[idx], q)

    def partial_expectation(self, a, b, tol=1e-12):
        return math.fsum(v * m for v, m in zip(self.support, self.masses) if a < v <= b)

    def mean(self):
        return math.fsum(v * m for v, m in zip(self.support, self.masses))

    def to_dict(self):
        return {"kind": self.kind, "support": list(self.support), "masses": list(self.masses)}


@dataclass(frozen=True)
class Reflected(Distribution):
    """Law of ``-X`` for a continuous base law."""

    base: Distribution = field(default_factory=Uniform)

    @property
    def kind(self) -> str:  # type: ignore[override]
        return f"reflected-{self.base.kind}"

    @property
    def support_lo(self) -> float:
        return -self.base.support_hi

    @property
    def support_hi(self) -> float:
        return -self.base.support_lo

    def breakpoints(self):
        return tuple(-b for b in reversed(self.base.breakpoints()))

    def _cdf(self, x):
        return 1.0 - np.asarray(self.base.cdf(-x))

    def _pdf(self, x):
        return np.asarray(self.base.pdf(-x))

    def reflect(self):
        return self.base

    def to_dict(self):
        return {"kind": "reflected", "base": self.base.to_dict()}


_KINDS = {"uniform": Uniform, "power": Power, "beta": Beta, "piecewise": PiecewiseLinear, "discrete": Discrete}
_FIELDS = {
    "uniform": {"lo", "hi"},
    "power": {"k"},
    "beta": {"a", "b", "lo", "hi"},
    "piecewise": {"knots"},
    "discrete": {"support", "masses"},
}


def from_dict(desc: dict[str, Any]) -> Distribution:
    """Build a distribution from its JSON form, e.g. ``{"kind": "power", "k": 2}``."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise DistributionError("distribution description must be an object with a 'kind' field")
    kind = desc["kind"]
    if kind == "reflected":
        return Reflected(from_dict(desc["base"]))
    if kind not in _KINDS:
        raise DistributionError(f"unknown distribution kind {kind!r}")
    params = {k: v for k, v in desc.items() if k != "kind"}
    unknown = set(params) - _FIELDS[kind]
    if unknown:
        raise DistributionError(f"unknown fields for {kind}: {sorted(unknown)}")
    if kind == "piecewise":
        params["knots"] = tuple(tuple(k) for k in params.get("knots", ()))
    if kind == "discrete":
        params = {"support": tuple(params.get("support", ())), "masses": tuple(params.get("masses", ()))}
    try:
        return _KINDS[kind](**params)
    except TypeError as exc:
        raise DistributionError(str(exc)) from exc


def cdf(d: Distribution, x):
    return d.cdf(x)


def pdf(d: Distribution, x):
    return d.pdf(x)


def quantile(d: Distribution, q):
    return d.quantile(q)


@dataclass(frozen=True)
class ShapeReport:
    symmetric: bool
    log_concave: bool
    worst_violation: float
    symmetry_violation: float
    log_concavity_violation: float

    @property
    def passed(self) -> bool:
        return self.symmetric and self.log_concave


def check_log_concave_symmetric(d: Distribution, n_grid: int = 1001, tol: float = CHECK_TOL) -> ShapeReport:
    """Grid test of symmetry about the support midpoint and log-concavity of the density.

    Symmetry: ``|f(c+x) - f(c-x)| <= tol``. Log-concavity: second differences
    of ``log f`` at most ``tol``. Piecewise-linear CDFs have step densities, so
    for them the test runs on the sequence of segment densities (the discrete
    analogue), which equal-width sliding averages of a log-concave density pass.
    """
    if not d.continuous:
        raise DistributionError("shape checks need a continuous distribution")
    lo, hi = d.support_lo, d.support_hi
    mid = 0.5 * (lo + hi)

    x = np.linspace(lo, hi, n_grid + 2)[1:-1]
    f = np.asarray(d.pdf(x))
    sym = float(np.max(np.abs(f - np.asarray(d.pdf(2 * mid - x)))))

    if isinstance(d, PiecewiseLinear):
        v = d._v
        xs = 0.5 * (v[:-1] + v[1:])
        fs = d.slopes
    else:
        xs, fs = x, f

    if np.any(fs <= 0):
        positive = np.flatnonzero(fs > 0)
        # a zero-density gap strictly inside the positive part breaks log-concavity
        interior_gap = positive.size and np.any(fs[positive[0] : positive[-1] + 1] <= 0)
        keep = fs > 0
        xs, fs = xs[keep], fs[keep]
        gap = math.inf if interior_gap else 0.0
    else:
        gap = 0.0

    lc = 0.0
    if xs.size >= 3:
        logf = np.log(fs)
        slopes = np.diff(logf) / np.diff(xs)
        # second differences scaled to the mean spacing, so uniform grids give plain differences
        h = float(np.mean(np.diff(xs)))
        lc = float(np.max(np.diff(slopes) * h)) if slopes.size > 1 else 0.0
    lc = max(lc, gap)

    return ShapeReport(
        symmetric=sym <= tol,
        log_concave=lc <= tol,
        worst_violation=max(sym, lc),
        symmetry_violation=sym,
        log_concavity_violation=lc,
    )
