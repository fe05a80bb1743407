"""Hotelling duopoly with verifiable disclosure.

Firms sit at ``-1`` (L) and ``+1`` (R); a consumer at ``t`` buying from firm
``i`` pays ``p_i + |t - loc_i|``. Every firm-side problem is solved in the
coordinate ``u = t * loc_i``, which measures how far toward firm ``i`` the
consumer sits. In that coordinate firm ``i`` faces the law of ``u`` and, when
the rival charges 0, a consumer at ``u > 0`` buys from ``i`` at any price up to
``2u``. Substituting ``x = p / 2`` turns each pool-pricing problem into the
monopoly truncated-price problem on ``[0, u_prev]``.

At equal total cost the consumer buys from the nearer firm, and at ``t = 0``
from L.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numerics import DEFAULT_GRID
from .dist import STRUCT_TOL, Distribution, DistributionError, check_log_concave_symmetric
from .monopoly import (
    EPS_MASS,
    EPS_PRICE,
    MAX_SEGMENTS,
    MonopolySegmentation,
    greedy_segmentation,
    optimal_truncated_price,
)

FIRMS = ("L", "R")
LOCATION = {"L": -1.0, "R": 1.0}
REGIMES = ("benchmark", "fully_revealing", "simple", "rich")
FIXED_POINT_TOL = 1e-6


def _check_firm(firm: str) -> float:
    if firm not in LOCATION:
        raise ValueError(f"firm must be 'L' or 'R', got {firm!r}")
    return LOCATION[firm]


@dataclass(frozen=True)
class DuopolyConfig:
    """Consumer distribution on ``[-1, 1]`` and gross value ``V``."""

    d: Distribution
    V: float = 3.0

    def __post_init__(self):
        if not self.d.continuous:
            raise DistributionError("duopoly needs a continuous distribution")
        if abs(self.d.support_lo + 1.0) > STRUCT_TOL or abs(self.d.support_hi - 1.0) > STRUCT_TOL:
            raise DistributionError(
                f"duopoly support must be [-1, 1], got [{self.d.support_lo}, {self.d.support_hi}]"
            )
        if not self.V >= 2.0:
            raise ValueError(f"V must be at least 2, got {self.V}")

    def side_law(self, firm: str) -> Distribution:
        """Law of ``u = t * loc_firm``."""
        return self.d if _check_firm(firm) > 0 else self.d.reflect()

    def require_benchmark(self) -> None:
        """Raise unless the symmetric benchmark price exists and the market is covered."""
        shape = check_log_concave_symmetric(self.d)
        if not shape.passed:
            raise DistributionError(
                "benchmark needs a symmetric log-concave density "
                f"(symmetry {shape.symmetry_violation:.3g}, log-concavity {shape.log_concavity_violation:.3g})"
            )
        f0 = float(self.d.pdf(0.0))
        # at equality the central type has zero surplus and still buys
        if not self.V >= 1.0 / f0 + 1.0 - STRUCT_TOL:
            raise ValueError(f"benchmark needs V >= 1/f(0) + 1 = {1.0 / f0 + 1.0!r}, got V = {self.V}")

    def to_dict(self) -> dict:
        return {"distribution": self.d.to_dict(), "V": self.V}


def purchase(t, p_L, p_R):
    """Chosen firm (``-1`` for L, ``+1`` for R) and total cost for consumers at ``t``."""
    t = np.asarray(t, dtype=float)
    cost_L = np.asarray(p_L, dtype=float) + 1.0 + t
    cost_R = np.asarray(p_R, dtype=float) + 1.0 - t
    buy_R = (cost_R < cost_L) | ((cost_R == cost_L) & (t > 0))
    return np.where(buy_R, 1.0, -1.0), np.where(buy_R, cost_R, cost_L)


@dataclass(frozen=True)
class BenchmarkPrice:
    p_star: float
    fixed_point_slack: float


def benchmark_price(cfg: DuopolyConfig, *, n_grid: int = 1000) -> BenchmarkPrice:
    """Symmetric uniform-price equilibrium ``p* = 2F(0)/f(0)``.

    Also checks on a price grid that ``p*`` is a best reply for L when R
    charges ``p*``: L then sells to ``t <= (p* - p)/2``.
    """
    cfg.require_benchmark()
    d = cfg.d
    p_star = 2.0 * float(d.cdf(0.0)) / float(d.pdf(0.0))
    grid = np.linspace(0.0, p_star + 2.0, n_grid)
    rev = grid * np.asarray(d.cdf((p_star - grid) / 2.0))
    own = p_star * float(d.cdf(0.0))
    slack = own - float(np.max(rev))
    if slack < -FIXED_POINT_TOL:
        raise DistributionError(f"p* = {p_star!r} is not a best reply (slack {slack!r})")
    return BenchmarkPrice(p_star, slack)


def fully_revealing_prices(t):
    """Prices ``(p_L, p_R)`` quoted to a consumer whose location is known."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise ValueError("locations must lie in [-1, 1]")
    p_L, p_R = np.maximum(-2.0 * t, 0.0), np.maximum(2.0 * t, 0.0)
    if t.ndim == 0:
        return float(p_L), float(p_R)
    return p_L, p_R


@dataclass(frozen=True)
class DuopolySimpleEq:
    """Reveal-or-conceal equilibrium.

    Types in ``[t1_L, t1_R]`` reveal to both firms. Types beyond ``t1_R``
    conceal from R, which charges its pool price ``p1_R``, and reveal to L,
    which then charges 0 (symmetrically on the left).
    """

    t1_L: float
    t1_R: float
    p1_L: float
    p1_R: float

    def cutoff(self, firm: str) -> float:
        _check_firm(firm)
        return self.t1_L if firm == "L" else self.t1_R

    def pool_price(self, firm: str) -> float:
        _check_firm(firm)
        return self.p1_L if firm == "L" else self.p1_R

    def price_map(self, firm: str, message: str, t: float | None = None) -> float:
        """Price firm ``firm`` charges on ``"reveal"`` (of location ``t``) or ``"nondisclose"``."""
        loc = _check_firm(firm)
        if message == "nondisclose":
            return self.pool_price(firm)
        if message == "reveal":
            if t is None:
                raise ValueError("a revealing message needs the location t")
            return max(2.0 * t * loc, 0.0)
        raise ValueError(f"unknown message {message!r}")

    def messages(self, t: float) -> tuple[str, str]:
        """Equilibrium messages ``(to L, to R)`` of a consumer at ``t``."""
        if t > self.t1_R:
            return "reveal", "nondisclose"
        if t < self.t1_L:
            return "nondisclose", "reveal"
        return "reveal", "reveal"

    def prices(self, t):
        """On-path ``(p_L, p_R)`` for locations ``t``."""
        t = np.asarray(t, dtype=float)
        p_L, p_R = np.maximum(-2.0 * t, 0.0), np.maximum(2.0 * t, 0.0)
        p_L = np.where(t < self.t1_L, self.p1_L, p_L)
        p_R = np.where(t > self.t1_R, self.p1_R, p_R)
        return p_L, p_R

    def to_dict(self) -> dict:
        return {"t1_L": self.t1_L, "t1_R": self.t1_R, "p1_L": self.p1_L, "p1_R": self.p1_R}


def simple_evidence_duopoly(cfg: DuopolyConfig, *, n_grid: int = DEFAULT_GRID) -> DuopolySimpleEq:
    """Pool prices are each firm's local monopoly price against its concealing types."""
    out = {}
    for firm in FIRMS:
        g = cfg.side_law(firm)
        if float(g.cdf(1.0)) - float(g.cdf(0.0)) <= 0.0:
            raise DistributionError(f"no consumers on firm {firm}'s side")
        x = optimal_truncated_price(g, 1.0, lo=0.0, n_grid=n_grid).p
        out[firm] = (LOCATION[firm] * x, 2.0 * x)
    return DuopolySimpleEq(out["L"][0], out["R"][0], out["L"][1], out["R"][1])


@dataclass(frozen=True)
class FirmSegments:
    """One firm's side of the rich-evidence equilibrium, stored in the ``u`` coordinate.

    ``seg.cutoffs`` are ``u_0 = 1 > u_1 > ...`` and ``seg.prices`` are
    ``p_s = 2 u_s``; the residual pool ``[0, u_S]`` is charged 0.
    """

    firm: str
    seg: MonopolySegmentation

    @property
    def location(self) -> float:
        return LOCATION[self.firm]

    @property
    def cutoffs(self) -> tuple[float, ...]:
        """Cutoffs in location units, starting at the firm's own location."""
        return tuple(self.location * u for u in self.seg.cutoffs)

    @property
    def prices(self) -> tuple[float, ...]:
        return self.seg.prices

    @property
    def truncation_reason(self) -> str | None:
        return self.seg.truncation_reason

    def to_dict(self) -> dict:
        return {
            "cutoffs": list(self.cutoffs),
            "prices": list(self.prices),
            "terminal_price": self.seg.terminal_price,
            "truncation_reason": self.truncation_reason,
        }


@dataclass(frozen=True)
class DuopolyRichEq:
    """Interval-evidence equilibrium: each side is segmented greedily toward the center.

    A consumer in segment ``s`` of firm ``i`` certifies that segment to both
    firms; firm ``i`` charges ``p_s`` and the rival charges 0.
    """

    L: FirmSegments
    R: FirmSegments

    def side(self, firm: str) -> FirmSegments:
        _check_firm(firm)
        return self.L if firm == "L" else self.R

    def prices(self, t):
        t = np.asarray(t, dtype=float)
        p_R = np.where(t > 0, self.R.seg.price_at(np.clip(t, 0.0, 1.0)), 0.0)
        p_L = np.where(t < 0, self.L.seg.price_at(np.clip(-t, 0.0, 1.0)), 0.0)
        return p_L, p_R

    def to_dict(self) -> dict:
        return {"L": self.L.to_dict(), "R": self.R.to_dict()}


def rich_evidence_duopoly(
    cfg: DuopolyConfig,
    eps_price: float = EPS_PRICE,
    eps_mass: float = EPS_MASS,
    max_segments: int = MAX_SEGMENTS,
    *,
    n_grid: int = DEFAULT_GRID,
) -> DuopolyRichEq:
    sides = {}
    for firm in FIRMS:
        g = cfg.side_law(firm)
        base = greedy_segmentation(g, eps_price, eps_mass, max_segments, floor=0.0, n_grid=n_grid)
        seg = MonopolySegmentation(
            base.cutoffs,
            tuple(2.0 * u for u in base.cutoffs[1:]),
            0.0,
            base.terminated_at_floor,
            base.truncation_reason,
            0.0,
        )
        sides[firm] = FirmSegments(firm, seg)
    return DuopolyRichEq(sides["L"], sides["R"])


def _expected_abs_location(cfg: DuopolyConfig, tol: float) -> float:
    return sum(cfg.side_law(f).partial_expectation(0.0, 1.0, tol) for f in FIRMS)


def _mass(g: Distribution, a: float, b: float) -> float:
    return float(g.cdf(b)) - float(g.cdf(a))


def expected_price(cfg: DuopolyConfig, which: str, eq=None, *, tol: float = 1e-12) -> float:
    """Ex-ante expected price paid under regime ``which``."""
    if which == "benchmark":
        return (eq if eq is not None else benchmark_price(cfg)).p_star
    if which == "fully_revealing":
        return 2.0 * _expected_abs_location(cfg, tol)
    if which == "simple":
        eq = eq if eq is not None else simple_evidence_duopoly(cfg)
        total = 0.0
        for firm in FIRMS:
            g = cfg.side_law(firm)
            u1 = abs(eq.cutoff(firm))
            total += eq.pool_price(firm) * _mass(g, u1, 1.0) + 2.0 * g.partial_expectation(0.0, u1, tol)
        return total
    if which == "rich":
        eq = eq if eq is not None else rich_evidence_duopoly(cfg)
        total = 0.0
        for firm in FIRMS:
            g = cfg.side_law(firm)
            seg = eq.side(firm).seg
            for lo, hi, price in seg.segments():
                total += price * _mass(g, lo, hi)
        return total
    raise ValueError(f"unknown regime {which!r}; expected one of {REGIMES}")


def regime_prices(cfg: DuopolyConfig, which: str, eq=None):
    """Return ``(eq, prices)`` where ``prices(t) -> (p_L, p_R)`` on path."""
    if which == "benchmark":
        eq = eq if eq is not None else benchmark_price(cfg)
        p = eq.p_star
        return eq, lambda t: (np.full(np.shape(t), p), np.full(np.shape(t), p))
    if which == "fully_revealing":
        return None, fully_revealing_prices
    if which == "simple":
        eq = eq if eq is not None else simple_evidence_duopoly(cfg)
        return eq, eq.prices
    if which == "rich":
        eq = eq if eq is not None else rich_evidence_duopoly(cfg)
        return eq, eq.prices
    raise ValueError(f"unknown regime {which!r}; expected one of {REGIMES}")


@dataclass(frozen=True)
class DuopolyWelfare:
    regime: str
    expected_price: float
    expected_cost: float
    expected_surplus: float
    t: np.ndarray = field(repr=False)
    price: np.ndarray = field(repr=False)
    cost: np.ndarray = field(repr=False)
    surplus: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "expected_price": self.expected_price,
            "expected_cost": self.expected_cost,
            "expected_surplus": self.expected_surplus,
        }


def duopoly_welfare(
    cfg: DuopolyConfig, which: str, eq=None, *, n_grid: int = 1001, tol: float = 1e-12
) -> DuopolyWelfare:
    """Interim cost curve (price plus travel) and its expectation under ``which``."""
    eq, prices = regime_prices(cfg, which, eq)
    t = np.linspace(-1.0, 1.0, n_grid)
    p_L, p_R = prices(t)
    firm, cost = purchase(t, p_L, p_R)
    price = np.where(firm > 0, p_R, p_L)
    e_price = expected_price(cfg, which, eq, tol=tol)
    e_cost = e_price + 1.0 - _expected_abs_location(cfg, tol)
    return DuopolyWelfare(which, e_price, e_cost, cfg.V - e_cost, t, price, cost, cfg.V - cost)


def cost_curves(cfg: DuopolyConfig, regimes=REGIMES, *, n_grid: int = 1001, eqs: dict | None = None) -> dict:
    """Columns ``t`` and ``<regime>_cost`` for export."""
    eqs = eqs or {}
    out = {"t": np.linspace(-1.0, 1.0, n_grid)}
    for r in regimes:
        out[f"{r}_cost"] = duopoly_welfare(cfg, r, eqs.get(r), n_grid=n_grid).cost
    return out


def benchmark_ratio(cfg: DuopolyConfig, which: str = "simple") -> float:
    """Expected cost under ``which`` relative to the benchmark."""
    return duopoly_welfare(cfg, which).expected_cost / duopoly_welfare(cfg, "benchmark").expected_cost

