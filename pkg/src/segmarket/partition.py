"""Consumer-optimal interval partitions of a finite type space.

Efficient partitional equilibria are interval partitions of the sorted support
in which the seller is willing to price each segment at its lowest value.
Among those, consumer surplus is maximized by minimizing the average price.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dist import Discrete, Distribution, STRUCT_TOL

FEAS_TOL = 1e-12
EXHAUSTIVE_MAX_N = 18


class PartitionError(RuntimeError):
    """Internal inconsistency in the partition search."""


@dataclass(frozen=True)
class DiscreteInstance:
    values: tuple[float, ...]
    masses: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "masses", masses)
        if len(values) != len(masses) or not values:
            raise ValueError("values and masses must be non-empty and of equal length")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("values must be strictly increasing")
        if values[0] < 0:
            raise ValueError("values must be nonnegative")
        if any(m <= 0 for m in masses):
            raise ValueError("masses must be positive")
        if abs(math.fsum(masses) - 1.0) > STRUCT_TOL:
            raise ValueError(f"masses sum to {math.fsum(masses)!r}, not 1")

    @property
    def n(self) -> int:
        return len(self.values)

    @classmethod
    def from_distribution(cls, d: Discrete) -> "DiscreteInstance":
        return cls(d.support, d.masses)

    @classmethod
    def from_dict(cls, desc: dict) -> "DiscreteInstance":
        unknown = set(desc) - {"values", "masses"}
        if unknown:
            raise ValueError(f"unknown instance fields: {sorted(unknown)}")
        return cls(tuple(desc["values"]), tuple(desc["masses"]))

    def to_dict(self) -> dict:
        return {"values": list(self.values), "masses": list(self.masses)}

    def prefix(self) -> np.ndarray:
        """``C[i] = masses[0] + ... + masses[i-1]``."""
        return np.concatenate(([0.0], np.cumsum(self.masses)))


@dataclass(frozen=True)
class PartitionSolution:
    """Consecutive segments given by their start indices (first is always 0)."""

    boundaries: tuple[int, ...]
    segment_prices: tuple[float, ...]
    avg_price: float
    feasible: bool
    n: int

    @property
    def segments(self) -> list[range]:
        ends = self.boundaries[1:] + (self.n,)
        return [range(a, b) for a, b in zip(self.boundaries, ends)]

    def price_of(self, index: int) -> float:
        s = int(np.searchsorted(self.boundaries, index, side="right")) - 1
        return self.segment_prices[s]

    def to_dict(self) -> dict:
        return {
            "boundaries": list(self.boundaries),
            "segment_prices": list(self.segment_prices),
            "avg_price": self.avg_price,
            "feasible": self.feasible,
        }


def segment_feasible(inst: DiscreteInstance, i: int, j: int, tol: float = FEAS_TOL) -> bool:
    """Seller weakly prefers pricing segment ``i..j`` (inclusive) at its bottom value.

    Buyers purchase when value >= price, so price ``values[k]`` earns
    ``values[k] * mass(k..j)``.
    """
    v = np.array(inst.values[i : j + 1])
    C = inst.prefix()
    r = v * (C[j + 1] - C[i : j + 1])
    return bool(r[0] >= r.max() - tol * max(abs(r[0]), 1.0))


def _solution(inst: DiscreteInstance, starts: Sequence[int], C: np.ndarray) -> PartitionSolution:
    starts = tuple(int(s) for s in starts)
    ends = starts[1:] + (inst.n,)
    total = 0.0
    for a, b in zip(starts, ends):
        total += inst.values[a] * (C[b] - C[a])
    feasible = all(segment_feasible(inst, a, b - 1) for a, b in zip(starts, ends))
    return PartitionSolution(starts, tuple(inst.values[a] for a in starts), float(total), feasible, inst.n)


def partition_cost(inst: DiscreteInstance, starts: Sequence[int]) -> float:
    """Average price of a partition, summed left to right."""
    return _solution(inst, starts, inst.prefix()).avg_price


def greedy_discrete(inst: DiscreteInstance) -> PartitionSolution:
    """Top-down greedy: price the remaining types at their lowest optimal posted price."""
    v = np.array(inst.values)
    C = inst.prefix()
    top = inst.n  # remaining types are indices < top
    starts = []
    while top > 0:
        rev = v[:top] * (C[top] - C[:top])
        best = rev.max()
        k = int(np.flatnonzero(rev >= best - FEAS_TOL * max(abs(best), 1.0))[0])
        starts.append(k)
        top = k
    return _solution(inst, starts[::-1], C)


def _feasible_row(v: np.ndarray, C: np.ndarray, j: int) -> np.ndarray:
    """Boolean mask over ``i <= j``: is segment ``i..j`` price-at-bottom feasible."""
    r = v[: j + 1] * (C[j + 1] - C[: j + 1])
    suffix_max = np.maximum.accumulate(r[::-1])[::-1]
    return r >= suffix_max - FEAS_TOL * np.maximum(np.abs(r), 1.0)


def optimal_partition_dp(inst: DiscreteInstance) -> PartitionSolution:
    """Exact minimum-average-price feasible interval partition, O(n^2).

    ``best[j+1] = min_i best[i] + values[i] * mass(i..j)`` over feasible
    segments ``i..j``. Ties go to fewer segments, then to the
    lexicographically earliest list of segment starts.
    """
    n = inst.n
    if n > 10_000:
        raise ValueError("instance too large for the quadratic program (n > 10000)")
    v = np.array(inst.values)
    C = inst.prefix()
    best = np.full(n + 1, np.inf)
    nseg = np.zeros(n + 1, dtype=np.int64)
    parent = np.full(n + 1, -1, dtype=np.int64)
    best[0] = 0.0

    def starts_of(end: int, last: int) -> list[int]:
        out = [last]
        i = last
        while i > 0:
            i = int(parent[i])
            out.append(i)
        return out[::-1]

    for j in range(n):
        ok = _feasible_row(v, C, j)
        idx = np.flatnonzero(ok)
        cost = best[idx] + v[idx] * (C[j + 1] - C[idx])
        segs = nseg[idx] + 1
        cmin = cost.min()
        tied = idx[cost == cmin]
        if tied.size > 1:
            smin = (nseg[tied] + 1).min()
            tied = tied[nseg[tied] + 1 == smin]
        if tied.size > 1:
            pick = min(tied.tolist(), key=lambda i: starts_of(j + 1, i))
        else:
            pick = int(tied[0])
        best[j + 1] = cmin
        nseg[j + 1] = nseg[pick] + 1
        parent[j + 1] = pick

    if not np.isfinite(best[n]):
        raise PartitionError("no feasible partition found; singletons are always feasible")
    starts = starts_of(n, int(parent[n]))
    sol = _solution(inst, starts, C)
    if not sol.feasible or sol.avg_price != best[n]:
        raise PartitionError("dynamic program produced an inconsistent solution")
    return sol


def exhaustive_partition_search(inst: DiscreteInstance) -> PartitionSolution:
    """Enumerate all ``2**(n-1)`` interval partitions; independent oracle for the DP."""
    n = inst.n
    if n > EXHAUSTIVE_MAX_N:
        raise ValueError(f"exhaustive search supports n <= {EXHAUSTIVE_MAX_N}, got {n}")
    C = inst.prefix()
    best_key = None
    best_sol = None
    for r in range(n):
        for cuts in itertools.combinations(range(1, n), r):
            starts = (0,) + cuts
            sol = _solution(inst, starts, C)
            if not sol.feasible:
                continue
            key = (sol.avg_price, len(starts), starts)
            if best_key is None or key < best_key:
                best_key, best_sol = key, sol
    if best_sol is None:
        raise PartitionError("no feasible partition found")
    return best_sol


def discretize_equal_mass(d: Distribution, n: int) -> DiscreteInstance:
    """``n`` atoms of mass ``1/n`` at the left endpoints of the quantile cells."""
    q = np.arange(n) / n
    values = np.asarray(d.quantile(q), dtype=float)
    if np.any(np.diff(values) <= 0):
        raise ValueError("discretization produced repeated values; reduce n")
    return DiscreteInstance(tuple(values.tolist()), (1.0 / n,) * n)


def power_law_reference_avg(k: float, tol: float = 1e-16) -> float:
    """Average greedy price for ``F(v)=v**k`` by summing segment mass times price."""
    gamma = (k + 1.0) ** (1.0 / k)
    total = 0.0
    ell = 0
    while True:
        term = (gamma ** (-k * ell) - gamma ** (-k * (ell + 1))) * gamma ** (-(ell + 1))
        total += term
        if term < tol * total or ell > 100_000:
            return total
        ell += 1


@dataclass(frozen=True)
class PowerLawCheck:
    k: float
    n_grid: int
    greedy_avg: float
    dp_avg: float
    gap: float
    continuous_greedy_avg: float


def power_law_optimality_check(k: float, n_grid: int) -> PowerLawCheck:
    """Compare greedy and optimal partitions on an equal-mass discretization of ``v**k``.

    ``gap = greedy_avg - dp_avg`` is nonnegative; it vanishing as ``n_grid``
    grows is consistent with the greedy segmentation being optimal.
    """
    from .dist import Power

    if k <= 0 or n_grid < 50:
        raise ValueError("need k > 0 and n_grid >= 50")
    inst = discretize_equal_mass(Power(k), n_grid)
    g = greedy_discrete(inst).avg_price
    o = optimal_partition_dp(inst).avg_price
    return PowerLawCheck(k, n_grid, g, o, g - o, power_law_reference_avg(k))

