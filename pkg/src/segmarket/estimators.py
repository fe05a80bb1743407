"""scikit-learn style wrappers: fit a type distribution, predict equilibrium prices.

``fit`` accepts either a :class:`~segmarket.dist.Distribution` or raw type
samples, which are smoothed into a piecewise-linear CDF. ``predict`` returns
the price each type pays and ``transform`` the index of its segment.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._numerics import DEFAULT_GRID
from ._validation import as_distribution, check_positive, check_types
from .dist import Discrete
from .duopoly import DuopolyConfig, duopoly_welfare, purchase, rich_evidence_duopoly, simple_evidence_duopoly
from .monopoly import (
    EPS_MASS,
    EPS_PRICE,
    MAX_SEGMENTS,
    greedy_segmentation,
    optimal_posted_price,
    segmentation_welfare,
)
from .partition import DiscreteInstance, discretize_equal_mass, greedy_discrete, optimal_partition_dp


class GreedySegmenter(TransformerMixin, BaseEstimator):
    """Greedy interval segmentation of a monopolist's market."""

    def __init__(self, eps_price=EPS_PRICE, eps_mass=EPS_MASS, max_segments=MAX_SEGMENTS, n_grid=DEFAULT_GRID):
        self.eps_price = eps_price
        self.eps_mass = eps_mass
        self.max_segments = max_segments
        self.n_grid = n_grid

    def fit(self, X, y=None):
        check_positive("eps_price", self.eps_price)
        check_positive("eps_mass", self.eps_mass)
        check_positive("max_segments", self.max_segments, integer=True)
        check_positive("n_grid", self.n_grid, integer=True)
        d = as_distribution(X)
        self.distribution_ = d
        self.p_star_ = optimal_posted_price(d, n_grid=self.n_grid).p
        self.segmentation_ = greedy_segmentation(
            d, self.eps_price, self.eps_mass, self.max_segments, n_grid=self.n_grid
        )
        self.welfare_ = segmentation_welfare(d, self.segmentation_)
        self.n_segments_ = self.segmentation_.n_segments
        return self

    def predict(self, X):
        check_is_fitted(self, "segmentation_")
        return self.segmentation_.price_at(check_types(X))

    def transform(self, X):
        """Segment index per type: 0 is the top segment, ``n_segments_`` the terminal pool."""
        check_is_fitted(self, "segmentation_")
        v = check_types(X)
        asc = np.array(self.segmentation_.cutoffs[::-1])
        j = np.clip(np.searchsorted(asc, v, side="left"), 1, asc.size - 1)
        idx = asc.size - 1 - j
        below = v <= asc[0]
        return np.where(below, self.n_segments_, idx).reshape(-1, 1)


class PartitionSegmenter(BaseEstimator):
    """Consumer-optimal interval partition of a finite (or discretized) type space."""

    def __init__(self, n_grid=200):
        self.n_grid = n_grid

    def fit(self, X, y=None):
        if isinstance(X, Discrete):
            inst = DiscreteInstance.from_distribution(X)
        elif isinstance(X, DiscreteInstance):
            inst = X
        elif hasattr(X, "cdf"):
            check_positive("n_grid", self.n_grid, integer=True)
            inst = discretize_equal_mass(X, self.n_grid)
        else:
            values, counts = np.unique(check_types(X), return_counts=True)
            inst = DiscreteInstance(tuple(values), tuple(counts / counts.sum()))
        self.instance_ = inst
        self.solution_ = optimal_partition_dp(inst)
        self.greedy_ = greedy_discrete(inst)
        self.gap_ = self.greedy_.avg_price - self.solution_.avg_price
        return self

    def predict(self, X):
        """Price of the segment holding the largest support point at or below each type."""
        check_is_fitted(self, "solution_")
        v = check_types(X)
        atoms = np.array(self.instance_.values)
        k = np.clip(np.searchsorted(atoms, v, side="right") - 1, 0, atoms.size - 1)
        starts = np.array(self.solution_.boundaries)
        seg = np.searchsorted(starts, k, side="right") - 1
        return np.array(self.solution_.segment_prices)[seg]


class DuopolySegmenter(BaseEstimator):
    """Disclosure equilibrium on the Hotelling line; types are locations in ``[-1, 1]``."""

    def __init__(self, evidence="rich", V=3.0, eps_price=EPS_PRICE, eps_mass=EPS_MASS, n_grid=DEFAULT_GRID):
        self.evidence = evidence
        self.V = V
        self.eps_price = eps_price
        self.eps_mass = eps_mass
        self.n_grid = n_grid

    def fit(self, X, y=None):
        if self.evidence not in ("simple", "rich"):
            raise ValueError(f"evidence must be 'simple' or 'rich', got {self.evidence!r}")
        check_positive("n_grid", self.n_grid, integer=True)
        cfg = DuopolyConfig(as_distribution(X, support=(-1.0, 1.0)), float(self.V))
        if self.evidence == "simple":
            eq = simple_evidence_duopoly(cfg, n_grid=self.n_grid)
        else:
            eq = rich_evidence_duopoly(cfg, self.eps_price, self.eps_mass, n_grid=self.n_grid)
        self.config_ = cfg
        self.equilibrium_ = eq
        self.welfare_ = duopoly_welfare(cfg, self.evidence, eq)
        return self

    def predict(self, X):
        """Price paid by each location to the firm it buys from."""
        check_is_fitted(self, "equilibrium_")
        t = check_types(X)
        p_L, p_R = self.equilibrium_.prices(t)
        firm, _ = purchase(t, p_L, p_R)
        return np.where(firm > 0, p_R, p_L)

    def transform(self, X):
        """Columns: chosen firm (-1 for L, +1 for R) and total cost."""
        check_is_fitted(self, "equilibrium_")
        t = check_types(X)
        firm, cost = purchase(t, *self.equilibrium_.prices(t))
        return np.column_stack((firm, cost))
