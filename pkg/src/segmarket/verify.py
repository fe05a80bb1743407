"""Numerical certification of candidate equilibria.

Each check scans a grid of consumer types or candidate prices and reports
its worst violation together with a witness: a plain dict from which
:func:`witness_violation` recomputes that violation without re-running the
scan. A check passes when its worst violation is at most its tolerance.

Off-path messages are priced skeptically: the seller treats an unexpected
interval as coming from its most lucrative member (the highest valuation for
the monopolist, the type closest to the firm in the duopoly).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dist import Distribution, check_log_concave_symmetric
from .duopoly import (
    FIRMS,
    LOCATION,
    DuopolyConfig,
    DuopolyRichEq,
    DuopolySimpleEq,
    benchmark_price,
    purchase,
    simple_evidence_duopoly,
)
from .monopoly import MonopolySegmentation, optimal_posted_price

N_TYPES = 1000
N_PRICES = 1000
ANALYTIC_TOL = 1e-9
QUADRATURE_TOL = 1e-6


def default_tolerance(d: Distribution) -> float:
    """Tight for closed-form CDFs, looser where the CDF comes from special functions or data."""
    kind = d.kind
    return QUADRATURE_TOL if ("beta" in kind or "piecewise" in kind) else ANALYTIC_TOL


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    worst_violation: float
    witness: dict
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "witness": self.witness,
            "tolerance": self.tolerance,
        }


def _check(name: str, violation: float, witness: dict, tol: float) -> Check:
    violation = float(violation)
    return Check(name, bool(violation <= tol), violation, witness, tol)


@dataclass
class VerificationReport:
    subject: str
    checks: list[Check] = field(default_factory=list)
    grid_sizes: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_violation(self) -> float:
        return max(c.worst_violation for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "grid_sizes": dict(self.grid_sizes),
            "tolerances": dict(self.tolerances),
            "notes": list(self.notes),
        }


# --- revenue and payoff primitives, shared by the scans and by witness replay ---


def _segment_revenue(d: Distribution, lo: float, hi: float, q):
    """Unconditional revenue of price ``q`` against valuations in ``(lo, hi]``."""
    q = np.asarray(q, dtype=float)
    mass = float(d.cdf(hi)) - np.asarray(d.cdf(np.maximum(q, lo)))
    return q * np.maximum(mass, 0.0)


def _pool_revenue(g: Distribution, a: float, b: float, rival: float, q):
    """Revenue of price ``q`` against a pool ``u in [a, b]`` when the rival charges ``rival``.

    A consumer at ``u`` prefers this firm iff ``q <= rival + 2u``.
    """
    q = np.asarray(q, dtype=float)
    cut = np.clip((q - rival) / 2.0, a, None)
    mass = np.where(cut > b, 0.0, float(g.cdf(b)) - np.asarray(g.cdf(np.minimum(cut, b))))
    return q * np.maximum(mass, 0.0)


def _surplus(v, price):
    return np.maximum(np.asarray(v, dtype=float) - np.asarray(price, dtype=float), 0.0)


def _side(d: Distribution, firm: str) -> Distribution:
    return d if LOCATION[firm] > 0 else d.reflect()


def witness_violation(d: Distribution, witness: dict) -> float:
    """Recompute a check's violation from its witness alone."""
    k = witness["kind"]
    if k == "seller_deviation":
        lo, hi = witness["segment"]
        rev = _segment_revenue(d, lo, hi, [witness["deviation"], witness["price"]])
        return float(rev[0] - rev[1])
    if k == "consumer_message":
        v = witness["v"]
        return float(_surplus(v, witness["alternative_price"]) - _surplus(v, witness["price"]))
    if k == "efficiency":
        return float(witness["price"] - witness["v"])
    if k == "pareto":
        v = witness["v"]
        return float(_surplus(v, witness["p_star"]) - _surplus(v, witness["price"]))
    if k == "strict_improvement":
        return float(witness["gain_tol"] - witness["max_gain"])
    if k == "firm_pool":
        g = _side(d, witness["firm"])
        a, b = witness["pool"]
        rev = _pool_revenue(g, a, b, witness["rival_price"], [witness["deviation"], witness["price"]])
        return float(rev[0] - rev[1])
    if k == "firm_single":
        # the deviation is the supremum of profitable prices, so it is scored with a weak inequality
        u, r, p = witness["u"], witness["rival_price"], witness["price"]
        own = p if witness["sells"] else 0.0
        dev = witness["deviation"]
        return float((dev if dev <= r + 2.0 * u else 0.0) - own)
    if k == "duopoly_consumer":
        t = witness["t"]
        _, c0 = purchase(t, *witness["prices"])
        _, c1 = purchase(t, *witness["alternative_prices"])
        return float(c0 - c1)
    if k == "price_consistency":
        return float(abs(witness["price"] - 2.0 * abs(witness["cutoff"])))
    if k == "pool_below_benchmark":
        return float(witness["price"] - witness["p_star"])
    if k == "interim_dominance":
        return float(witness["cost"] - witness["reference_cost"])
    raise ValueError(f"unknown witness kind {k!r}")


# --- monopoly ---


def _half_open_price(segs, v):
    """Price of the segment ``(lo, hi]`` containing each ``v``; the bottom type joins the lowest segment."""
    out = np.full(v.shape, np.nan)
    for lo, hi, p in segs:
        out = np.where((v > lo) & (v <= hi), p, out)
    return np.where(np.isnan(out) & (v <= segs[-1][0]), segs[-1][2], out)


def verify_monopoly_segmentation(
    d: Distribution,
    seg: MonopolySegmentation,
    *,
    n_types: int = N_TYPES,
    n_prices: int = N_PRICES,
    tol: float | None = None,
) -> VerificationReport:
    """Seller optimality, on-path and off-path consumer incentives, and efficiency."""
    tol = default_tolerance(d) if tol is None else tol
    segs = seg.segments()
    rep = VerificationReport(
        "monopoly-segmentation",
        grid_sizes={"types": n_types, "prices": n_prices},
        tolerances={"check": tol},
    )

    worst, wit = -np.inf, {}
    for lo, hi, p in segs:
        q = np.append(np.linspace(lo, hi, n_prices), p)
        rev = _segment_revenue(d, lo, hi, q)
        k = int(np.argmax(rev))
        gap = float(rev[k] - rev[-1])
        if gap > worst:
            worst = gap
            wit = {"kind": "seller_deviation", "segment": [lo, hi], "price": p, "deviation": float(q[k])}
    rep.checks.append(_check("seller_optimality", worst, wit, tol))

    cuts = np.array(sorted({c for lo, hi, _ in segs for c in (lo, hi)}))
    v = np.unique(np.concatenate((np.linspace(d.support_lo, d.support_hi, n_types), cuts)))
    assigned = _half_open_price(segs, v)
    alt = np.full(v.shape, np.inf)
    for lo, hi, p in segs:
        alt = np.where((v >= lo) & (v <= hi), np.minimum(alt, p), alt)
    gain = _surplus(v, alt) - _surplus(v, assigned)
    k = int(np.argmax(gain))
    rep.checks.append(
        _check(
            "consumer_on_path",
            gain[k],
            {"kind": "consumer_message", "v": float(v[k]), "price": float(assigned[k]), "alternative_price": float(alt[k])},
            tol,
        )
    )

    # the cheapest off-path interval containing v is {v}, priced skeptically at v
    gain = _surplus(v, v) - _surplus(v, assigned)
    k = int(np.argmax(gain))
    rep.checks.append(
        _check(
            "consumer_off_path",
            gain[k],
            {"kind": "consumer_message", "v": float(v[k]), "price": float(assigned[k]), "alternative_price": float(v[k])},
            tol,
        )
    )

    # each segment's infimum type is approached from inside
    inner = np.array([np.nextafter(lo, np.inf) for lo, hi, _ in segs if hi > lo])
    v_eff = np.concatenate((v, inner))
    p_eff = _half_open_price(segs, v_eff)
    excess = p_eff - v_eff
    k = int(np.argmax(excess))
    rep.checks.append(
        _check("efficiency", excess[k], {"kind": "efficiency", "v": float(v_eff[k]), "price": float(p_eff[k])}, tol)
    )
    return rep


def _strict_gain_check(name: str, grid: np.ndarray, gain: np.ndarray, gain_tol: float) -> Check:
    strict = gain >= gain_tol
    witness = {
        "kind": "strict_improvement",
        "gain_tol": gain_tol,
        "max_gain": float(np.max(gain)),
        "strict_fraction": float(np.mean(strict)),
        "strict_hull": [float(grid[strict].min()), float(grid[strict].max())] if strict.any() else None,
    }
    return _check(name, gain_tol - witness["max_gain"], witness, 0.0)


def verify_pareto_vs_benchmark(
    d: Distribution,
    seg: MonopolySegmentation | Callable,
    *,
    p_star: float | None = None,
    n_types: int = N_TYPES,
    tol: float | None = None,
) -> VerificationReport:
    """Every type weakly gains over the posted price ``p_star``, some strictly.

    ``seg`` is a segmentation or a vectorized map from valuation to price.
    """
    tol = default_tolerance(d) if tol is None else tol
    if p_star is None:
        p_star = optimal_posted_price(d).p
    price_of = seg.price_at if isinstance(seg, MonopolySegmentation) else seg
    v = np.linspace(d.support_lo, d.support_hi, n_types)
    price = np.asarray(price_of(v), dtype=float)
    gain = _surplus(v, price) - _surplus(v, p_star)
    rep = VerificationReport(
        "monopoly-pareto",
        grid_sizes={"types": n_types},
        tolerances={"check": tol, "strict_gain": tol},
    )
    k = int(np.argmin(gain))
    rep.checks.append(
        _check(
            "pareto_weak",
            -gain[k],
            {"kind": "pareto", "v": float(v[k]), "price": float(price[k]), "p_star": p_star},
            tol,
        )
    )
    rep.checks.append(_strict_gain_check("pareto_strict", v, gain, tol))
    return rep


# --- duopoly ---


def _single_type_check(t: np.ndarray, p_L: np.ndarray, p_R: np.ndarray, revealed: dict, tol: float) -> Check:
    """Each firm's price to each type revealed to it is a best reply to the rival's price.

    Against a single consumer at ``u`` (own coordinate) facing rival price
    ``r``, the supremum revenue is ``max(r + 2u, 0)``.
    """
    firm_idx, _ = purchase(t, p_L, p_R)
    worst, wit = -np.inf, {}
    for firm in FIRMS:
        loc = LOCATION[firm]
        u = t * loc
        own, rival = (p_R, p_L) if loc > 0 else (p_L, p_R)
        sells = firm_idx == loc
        best = np.maximum(rival + 2.0 * u, 0.0)
        gap = np.where(revealed[firm], best - np.where(sells, own, 0.0), -np.inf)
        k = int(np.argmax(gap))
        if gap[k] > worst:
            worst = float(gap[k])
            wit = {
                "kind": "firm_single",
                "firm": firm,
                "t": float(t[k]),
                "u": float(u[k]),
                "price": float(own[k]),
                "rival_price": float(rival[k]),
                "sells": bool(sells[k]),
                "deviation": float(best[k]),
            }
    return _check("firm_best_response_revealed", worst, wit, tol)


def _pool_check(cfg: DuopolyConfig, pools, n_prices: int, tol: float) -> Check:
    """``pools`` lists ``(firm, a, b, price, rival_price)`` in the firm's own coordinate."""
    worst, wit = -np.inf, {}
    for firm, a, b, price, rival in pools:
        g = cfg.side_law(firm)
        q = np.append(np.linspace(0.0, max(rival + 2.0 * b, 0.0), n_prices), price)
        rev = _pool_revenue(g, a, b, rival, q)
        k = int(np.argmax(rev))
        gap = float(rev[k] - rev[-1])
        if gap > worst:
            worst = gap
            wit = {
                "kind": "firm_pool",
                "firm": firm,
                "pool": [a, b],
                "price": price,
                "rival_price": rival,
                "deviation": float(q[k]),
            }
    return _check("firm_best_response_pool", worst, wit, tol)


def _consumer_check(t, prescribed, alternatives, tol: float) -> Check:
    """``alternatives`` is a list of ``(label, p_L, p_R, feasible_mask)``."""
    _, c0 = purchase(t, *prescribed)
    best = np.full(t.shape, np.inf)
    best_L = np.zeros_like(t)
    best_R = np.zeros_like(t)
    label = np.full(t.shape, "", dtype=object)
    for name, a_L, a_R, ok in alternatives:
        _, c = purchase(t, a_L, a_R)
        better = ok & (c < best)
        best = np.where(better, c, best)
        best_L = np.where(better, a_L, best_L)
        best_R = np.where(better, a_R, best_R)
        label = np.where(better, name, label)
    gap = c0 - best
    k = int(np.argmax(gap))
    wit = {
        "kind": "duopoly_consumer",
        "t": float(t[k]),
        "prices": [float(prescribed[0][k]), float(prescribed[1][k])],
        "alternative_prices": [float(best_L[k]), float(best_R[k])],
        "alternative": str(label[k]),
    }
    return _check("consumer_no_deviation", gap[k], wit, tol)


def _simple_checks(cfg, eq: DuopolySimpleEq, t, n_prices, tol) -> list[Check]:
    checks = []
    worst, wit = -np.inf, {}
    for firm in FIRMS:
        c, p = eq.cutoff(firm), eq.pool_price(firm)
        gap = abs(p - 2.0 * abs(c))
        if not 0.0 < c * LOCATION[firm] < 1.0:
            gap = max(gap, 1.0)
        if gap > worst:
            worst, wit = gap, {"kind": "price_consistency", "firm": firm, "cutoff": c, "price": p}
    checks.append(_check("cutoff_price_consistency", worst, wit, tol))

    prescribed = eq.prices(t)
    rev_L, rev_R = np.maximum(-2.0 * t, 0.0), np.maximum(2.0 * t, 0.0)
    ones = np.ones_like(t, dtype=bool)
    alternatives = []
    for m_L, a_L in (("reveal", rev_L), ("nondisclose", np.full_like(t, eq.p1_L))):
        for m_R, a_R in (("reveal", rev_R), ("nondisclose", np.full_like(t, eq.p1_R))):
            alternatives.append((f"{m_L}/{m_R}", a_L, a_R, ones))
    checks.append(_consumer_check(t, prescribed, alternatives, tol))

    # concealing types beyond the cutoff reveal to the rival, which charges them 0
    pools = [(f, abs(eq.cutoff(f)), 1.0, eq.pool_price(f), 0.0) for f in FIRMS]
    checks.append(_pool_check(cfg, pools, n_prices, tol))
    revealed = {"L": t >= eq.t1_L, "R": t <= eq.t1_R}
    checks.append(_single_type_check(t, *prescribed, revealed, tol))
    return checks


def _rich_checks(cfg, eq: DuopolyRichEq, t, n_prices, tol) -> list[Check]:
    checks = []
    worst, wit = -np.inf, {}
    for firm in FIRMS:
        side = eq.side(firm)
        for c, p in zip(side.cutoffs[1:], side.prices):
            gap = abs(p - 2.0 * abs(c))
            if gap > worst:
                worst, wit = gap, {"kind": "price_consistency", "firm": firm, "cutoff": c, "price": p}
    checks.append(_check("cutoff_price_consistency", worst, wit, tol))

    cuts = [c for f in FIRMS for c in eq.side(f).cutoffs]
    t = np.unique(np.concatenate((t, cuts, [0.0])))
    prescribed = eq.prices(t)
    alternatives = []
    pools = []
    for firm in FIRMS:
        loc = LOCATION[firm]
        u = t * loc
        for lo, hi, p in eq.side(firm).seg.segments():
            ok = (u >= lo) & (u <= hi)
            own = np.full_like(t, p)
            zero = np.zeros_like(t)
            a_L, a_R = (zero, own) if loc > 0 else (own, zero)
            alternatives.append((f"{firm}:[{lo!r},{hi!r}]", a_L, a_R, ok))
            pools.append((firm, lo, hi, p, 0.0))
            # the rival sees the same pool from the far side
            other = "L" if firm == "R" else "R"
            pools.append((other, -hi, -lo, 0.0, p))
    fr_L, fr_R = np.maximum(-2.0 * t, 0.0), np.maximum(2.0 * t, 0.0)
    alternatives.append(("off-path singleton", fr_L, fr_R, np.ones_like(t, dtype=bool)))
    checks.append(_consumer_check(t, prescribed, alternatives, tol))
    checks.append(_pool_check(cfg, pools, n_prices, tol))
    return checks


def verify_duopoly(
    cfg: DuopolyConfig,
    eq: DuopolySimpleEq | DuopolyRichEq,
    *,
    n_types: int = N_TYPES,
    n_prices: int = N_PRICES,
    tol: float | None = None,
) -> VerificationReport:
    """Consumer and firm incentive scans plus interim dominance over the uniform-price benchmark."""
    tol = default_tolerance(cfg.d) if tol is None else tol
    t = np.linspace(-1.0, 1.0, n_types)
    rich = isinstance(eq, DuopolyRichEq)
    rep = VerificationReport(
        "duopoly-rich" if rich else "duopoly-simple",
        grid_sizes={"types": n_types, "prices": n_prices},
        tolerances={"check": tol, "strict_gain": tol},
    )
    rep.checks.extend(_rich_checks(cfg, eq, t, n_prices, tol) if rich else _simple_checks(cfg, eq, t, n_prices, tol))

    if not check_log_concave_symmetric(cfg.d).passed:
        rep.notes.append("benchmark comparison skipped: density is not symmetric and log-concave")
        return rep

    p_star = benchmark_price(cfg).p_star
    _, cost = purchase(t, *eq.prices(t))
    _, bench = purchase(t, np.full_like(t, p_star), np.full_like(t, p_star))
    if rich:
        top = max(eq.L.prices[0], eq.R.prices[0])
    else:
        top = max(eq.p1_L, eq.p1_R)
    rep.checks.append(
        _check("pool_price_below_benchmark", top - p_star, {"kind": "pool_below_benchmark", "price": top, "p_star": p_star}, tol)
    )
    excess = cost - bench
    k = int(np.argmax(excess))
    rep.checks.append(
        _check(
            "interim_dominance_benchmark",
            excess[k],
            {"kind": "interim_dominance", "t": float(t[k]), "cost": float(cost[k]), "reference_cost": float(bench[k])},
            tol,
        )
    )
    rep.checks.append(_strict_gain_check("strict_gain_benchmark", t, bench - cost, tol))
    if rich:
        _, simple = purchase(t, *simple_evidence_duopoly(cfg).prices(t))
        excess = cost - simple
        k = int(np.argmax(excess))
        rep.checks.append(
            _check(
                "interim_dominance_simple",
                excess[k],
                {"kind": "interim_dominance", "t": float(t[k]), "cost": float(cost[k]), "reference_cost": float(simple[k])},
                tol,
            )
        )
    return rep
