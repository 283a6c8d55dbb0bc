"""scikit-learn style wrappers around the protocols and the scaling fit."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .comm_runtime import RandomTape, run_protocol
from .graph_core import EdgePartition
from .harness import fit_scaling, make_protocol
from .instance_gen import PartitionStrategy, partition_edges
from .validation import check_fraction, check_instances, check_points, check_positive_int


class TriangleFreenessTester(BaseEstimator):
    """Runs one protocol per input; ``predict`` returns 1 when a triangle was found.

    Graphs are split among ``k`` players with ``partition``; ready-made
    partitions are used as given.
    """

    def __init__(self, protocol="find_triangle", epsilon=1 / 3, delta=0.1, k=4,
                 partition="random_assign", mode=None, random_state=0):
        self.protocol = protocol
        self.epsilon = epsilon
        self.delta = delta
        self.k = k
        self.partition = partition
        self.mode = mode
        self.random_state = random_state

    def fit(self, X=None, y=None):
        check_fraction(self.epsilon, "epsilon", closed_right=True)
        check_fraction(self.delta, "delta")
        check_positive_int(self.k, "k")
        PartitionStrategy(self.partition, self.k)
        make_protocol(self.protocol, self.epsilon, self.delta, 1.0)
        self.rng_ = np.random.default_rng(self.random_state)
        self.outcomes_ = []
        return self

    def _partition(self, item) -> EdgePartition:
        if isinstance(item, EdgePartition):
            return item
        seed = int(self.rng_.integers(2 ** 63))
        return partition_edges(item, PartitionStrategy(self.partition, self.k, seed))

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "rng_")
        out = []
        for item in check_instances(X):
            part = self._partition(item)
            d = part.graph.average_degree or None
            protocol = make_protocol(self.protocol, self.epsilon, self.delta, d)
            outcome = run_protocol(part, protocol, self.mode, RandomTape(int(self.rng_.integers(2 ** 63))))
            self.outcomes_.append(outcome)
            out.append(int(outcome.found))
        return np.array(out, dtype=int)

    @property
    def bits_(self) -> np.ndarray:
        check_is_fitted(self, "rng_")
        return np.array([o.bits for o in self.outcomes_], dtype=int)


class ScalingExponent(BaseEstimator):
    """Power law ``bits ~ C n^slope`` fitted on log2 axes."""

    def fit(self, n_values, bits):
        n_values, bits = check_points(n_values, bits)
        fit = fit_scaling(zip(n_values, bits))
        self.slope_, self.stderr_, self.intercept_ = fit.slope, fit.stderr, fit.intercept
        return self

    def predict(self, n_values) -> np.ndarray:
        check_is_fitted(self, "slope_")
        return 2.0 ** (self.intercept_ + self.slope_ * np.log2(np.asarray(n_values, dtype=float)))
