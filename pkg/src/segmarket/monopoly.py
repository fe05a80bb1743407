"""Monopoly pricing with verifiable disclosure.

Posted-price optimization, the equilibria available under simple
(reveal-or-conceal) evidence, the greedy segmentation supported by rich
(interval) evidence, and ex-ante / interim welfare accounting.

A consumer whose valuation is exactly on a cutoff may send either adjacent
interval; she sends the one with the lower price, so segments are half-open
``(p_s, p_{s-1}]``. The Dye-style variant in which the consumer sometimes
lacks evidence needs no separate construction: consumers without evidence are
charged ``p_star`` and those with evidence segment as usual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numerics import DEFAULT_GRID, lowest_maximizer
from .dist import Distribution, DistributionError

EPS_PRICE = 1e-6
EPS_MASS = 1e-9
MAX_SEGMENTS = 200

TRUNCATION_REASONS = ("floor", "eps_price", "eps_mass", "max_segments")


@dataclass(frozen=True)
class PriceResult:
    p: float
    revenue: float


def _require_continuous(d: Distribution) -> None:
    if not d.continuous:
        raise DistributionError(f"{d.kind} distribution is not continuous")


def optimal_truncated_price(
    d: Distribution, hi: float, *, lo: float | None = None, n_grid: int = DEFAULT_GRID
) -> PriceResult:
    """Lowest maximizer of ``p * (F(hi) - F(p))`` over ``[lo, hi]``.

    ``lo`` defaults to the bottom of the support.
    """
    _require_continuous(d)
    lo = d.support_lo if lo is None else float(lo)
    if not d.support_lo <= lo <= hi <= d.support_hi:
        raise ValueError(f"bad truncation [{lo}, {hi}] for support [{d.support_lo}, {d.support_hi}]")
    f_hi = float(d.cdf(hi))

    def revenue(p):
        return p * (f_hi - np.asarray(d.cdf(p)))

    def slope(p):
        return f_hi - float(d.cdf(p)) - p * float(d.pdf(p))

    p, rev = lowest_maximizer(revenue, lo, hi, dfun=slope, n_grid=n_grid)
    return PriceResult(p, rev)


def optimal_posted_price(d: Distribution, *, n_grid: int = DEFAULT_GRID) -> PriceResult:
    """Lowest maximizer ``p_star`` of ``p * (1 - F(p))``."""
    return optimal_truncated_price(d, d.support_hi, n_grid=n_grid)


@dataclass(frozen=True)
class MonopolySegmentation:
    """Interval segmentation of valuations with one price per segment.

    Segment ``s`` (1-based) is ``(cutoffs[s], cutoffs[s-1]]`` and is charged
    ``prices[s-1]``. Types in ``[support_lo, cutoffs[-1]]`` form the terminal
    pool, charged ``terminal_price``; when ``terminated_at_floor`` that pool is
    the single type ``support_lo``.
    """

    cutoffs: tuple[float, ...]
    prices: tuple[float, ...]
    support_lo: float
    terminated_at_floor: bool
    truncation_reason: str | None = None
    terminal_price: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple(float(c) for c in self.cutoffs))
        object.__setattr__(self, "prices", tuple(float(p) for p in self.prices))
        if len(self.cutoffs) != len(self.prices) + 1:
            raise ValueError("need exactly one more cutoff than prices")
        if any(b >= a for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            raise ValueError("cutoffs must be strictly decreasing")
        if self.terminal_price is None:
            object.__setattr__(self, "terminal_price", float(self.support_lo))

    @classmethod
    def posted(cls, d: Distribution, price: float) -> "MonopolySegmentation":
        """No personalization: one segment covering the support, one price."""
        return cls((d.support_hi, d.support_lo), (price,), d.support_lo, True, None, price)

    @property
    def n_segments(self) -> int:
        return len(self.prices)

    def segments(self) -> list[tuple[float, float, float]]:
        """``(lo, hi, price)`` per segment, top first, terminal pool last if non-degenerate."""
        out = [(self.cutoffs[s + 1], self.cutoffs[s], self.prices[s]) for s in range(self.n_segments)]
        if self.cutoffs[-1] > self.support_lo:
            out.append((self.support_lo, self.cutoffs[-1], self.terminal_price))
        return out

    def price_at(self, v):
        """Price quoted to valuation ``v`` (boundary types take the cheaper side)."""
        v = np.asarray(v, dtype=float)
        vs = np.atleast_1d(v)
        asc = np.array(self.cutoffs[::-1])
        by_seg = np.array((self.terminal_price,) + self.prices[::-1])
        # asc[j-1] < v <= asc[j]  ->  segment priced by_seg[j]
        j = np.clip(np.searchsorted(asc, vs, side="left"), 0, asc.size - 1)
        out = by_seg[j]
        on_cut = (j < asc.size - 1) & (asc[j] == vs)
        if np.any(on_cut):
            out = np.where(on_cut, np.minimum(out, by_seg[np.minimum(j + 1, asc.size - 1)]), out)
        return float(out[0]) if v.ndim == 0 else out.reshape(v.shape)

    def is_efficient(self, tol: float = 0.0) -> bool:
        """Every segment's price is at or below its lowest valuation."""
        return all(p <= lo + tol for lo, _, p in self.segments()) and self.terminal_price <= self.support_lo + tol

    def to_dict(self, d: Distribution | None = None) -> dict:
        out = {
            "cutoffs": list(self.cutoffs),
            "prices": list(self.prices),
            "terminal_price": self.terminal_price,
            "terminated_at_floor": self.terminated_at_floor,
            "truncation_reason": self.truncation_reason,
        }
        if d is not None:
            out["segment_mass"] = [float(d.cdf(hi)) - float(d.cdf(lo)) for lo, hi, _ in self.segments()]
        return out


def greedy_segmentation(
    d: Distribution,
    eps_price: float = EPS_PRICE,
    eps_mass: float = EPS_MASS,
    max_segments: int = MAX_SEGMENTS,
    *,
    floor: float | None = None,
    n_grid: int = DEFAULT_GRID,
) -> MonopolySegmentation:
    """Greedy segmentation: each cutoff is the optimal price against the truncated law.

    Starting from ``p_0 = support_hi``, ``p_s`` is the lowest maximizer of
    ``p (F(p_{s-1}) - F(p))``. Stops when ``p_s`` hits the support floor, when
    it falls within ``eps_price`` of it, when the new segment carries less
    than ``eps_mass``, or after ``max_segments`` segments. ``floor`` raises
    the lowest admissible price above the bottom of the support.
    """
    _require_continuous(d)
    if eps_price <= 0 or eps_mass <= 0 or max_segments < 1:
        raise ValueError("eps_price, eps_mass must be positive and max_segments >= 1")
    lo = d.support_lo if floor is None else float(floor)
    cutoffs = [d.support_hi]
    reason = "max_segments"
    for s in range(1, max_segments + 1):
        p = optimal_truncated_price(d, cutoffs[-1], lo=lo, n_grid=n_grid).p
        mass = float(d.cdf(cutoffs[-1])) - float(d.cdf(p))
        cutoffs.append(p)
        if p <= lo:
            cutoffs[-1] = lo
            reason = "floor"
            break
        if p < lo + eps_price:
            reason = "eps_price"
            break
        if mass < eps_mass:
            reason = "eps_mass"
            break
    return MonopolySegmentation(tuple(cutoffs), tuple(cutoffs[1:]), lo, reason == "floor", reason)


@dataclass(frozen=True)
class SimpleEvidenceEquilibrium:
    """Equilibrium under reveal-or-conceal evidence.

    Revealing types are charged their valuation. ``nd_set`` is one of
    ``"none"`` (full unraveling; ``nd_price`` is the off-path price),
    ``"types-above-cutoff"`` or ``"all-types"``.
    """

    name: str
    nd_price: float
    nd_set: str
    cutoff: float | None
    p_star: float
    best_response_slack: float
    revealing_price_rule: str = "price = valuation"

    @property
    def verified(self) -> bool:
        return self.best_response_slack >= -1e-9 and self.nd_price >= self.p_star - 1e-10

    def interim_surplus(self, v):
        v = np.asarray(v, dtype=float)
        if self.nd_set == "none":
            return np.zeros_like(v) if v.ndim else 0.0
        conceals = v >= (self.cutoff if self.cutoff is not None else -math.inf)
        out = np.where(conceals, np.maximum(v - self.nd_price, 0.0), 0.0)
        return float(out) if v.ndim == 0 else out


def _pool_slack(d: Distribution, price: float, pool_lo: float, n_grid: int) -> float:
    """Revenue of ``price`` minus the best grid revenue against types above ``pool_lo``."""
    grid = np.linspace(d.support_lo, d.support_hi, n_grid)
    rev = grid * (1.0 - np.asarray(d.cdf(np.maximum(grid, pool_lo))))
    own = price * (1.0 - float(d.cdf(max(price, pool_lo))))
    return own - float(np.max(rev))


def simple_evidence_equilibria(d: Distribution, *, n_grid: int = 1000) -> list[SimpleEvidenceEquilibrium]:
    """Full unraveling, the consumer-best cutoff equilibrium and full pooling."""
    _require_continuous(d)
    p_star = optimal_posted_price(d).p
    hi = d.support_hi
    return [
        # off-path concealment is read as the top type, who is charged her value
        SimpleEvidenceEquilibrium("full-unraveling", hi, "none", None, p_star, 0.0),
        SimpleEvidenceEquilibrium(
            "cutoff", p_star, "types-above-cutoff", p_star, p_star, _pool_slack(d, p_star, p_star, n_grid)
        ),
        SimpleEvidenceEquilibrium(
            "full-pooling", p_star, "all-types", None, p_star, _pool_slack(d, p_star, d.support_lo, n_grid)
        ),
    ]


@dataclass(frozen=True)
class WelfareReportMonopoly:
    cs_ex_ante: float
    ps_ex_ante: float
    avg_price: float
    trade_prob: float
    grid: np.ndarray = field(repr=False)
    interim_price: np.ndarray = field(repr=False)
    interim_surplus: np.ndarray = field(repr=False)

    @property
    def total_surplus(self) -> float:
        return self.cs_ex_ante + self.ps_ex_ante

    def to_dict(self) -> dict:
        return {
            "cs_ex_ante": self.cs_ex_ante,
            "ps_ex_ante": self.ps_ex_ante,
            "avg_price": self.avg_price,
            "trade_prob": self.trade_prob,
        }


def segmentation_welfare(
    d: Distribution, seg: MonopolySegmentation, *, n_grid: int = 1001, tol: float = 1e-12
) -> WelfareReportMonopoly:
    """Ex-ante consumer/producer surplus and interim curves; buyers purchase iff ``v >= price``."""
    cs = ps = trade = 0.0
    for lo, hi, price in seg.segments():
        start = max(lo, price)
        if start >= hi:
            continue
        mass = float(d.cdf(hi)) - float(d.cdf(start))
        ps += price * mass
        cs += d.partial_expectation(start, hi, tol) - price * mass
        trade += mass
    grid = np.linspace(d.support_lo, d.support_hi, n_grid)
    prices = seg.price_at(grid)
    surplus = np.maximum(grid - prices, 0.0)
    avg = ps / trade if trade > 0 else math.nan
    return WelfareReportMonopoly(cs, ps, avg, trade, grid, prices, surplus)


def interim_payoff_zeno(v: float) -> float:
    """Surplus of valuation ``v`` under the uniform halving segmentation."""
    if not 0.0 < v <= 1.0:
        raise ValueError(f"valuation must lie in (0, 1], got {v}")
    return v - 0.5 ** (math.floor(-math.log2(v)) + 1)


def benchmark_surplus(d: Distribution, p_star: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Interim surplus without personalized pricing, ``max(v - p_star, 0)``."""
    if p_star is None:
        p_star = optimal_posted_price(d).p
    return lambda v: np.maximum(np.asarray(v, dtype=float) - p_star, 0.0)


def segmentation_from_cutoffs(
    d: Distribution, cutoffs: Sequence[float], prices: Sequence[float] | None = None
) -> MonopolySegmentation:
    """Hand-built segmentation; prices default to each segment's bottom."""
    cutoffs = tuple(float(c) for c in cutoffs)
    prices = tuple(cutoffs[1:]) if prices is None else tuple(prices)
    floor = cutoffs[-1] <= d.support_lo
    return MonopolySegmentation(cutoffs, prices, d.support_lo, floor, None)
