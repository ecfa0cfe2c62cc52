"""Analytic denoisers used as sampler oracles, plus the batch container.

The two oracles are exact noise predictors for degenerate data
distributions, so they validate the whole sampling loop with no training:

* ``SinglePointOracle``  the dataset is one fixed map x*; the noise in any
  x_t is identified exactly, and the chain must land on x*.
* ``GaussianOracle``     x0 ~ N(0, I); the optimal predictor is
  sqrt(1-alpha_bar_t) * x_t, and the chain's output stays standard normal.
"""

import numpy as np

from ..validation import require


class SinglePointOracle:
    """Exact eps-predictor when the data distribution is a single map x*."""

    def __init__(self, x_star, sched):
        self.x_star = np.asarray(x_star, dtype=np.float64)
        self.sched = sched

    def __call__(self, x_t, y, t):
        s = self.sched
        return (x_t - s.sqrt_alpha_bar[t] * self.x_star) / s.sqrt_one_minus_alpha_bar[t]


class GaussianOracle:
    """Optimal eps-predictor for x0 ~ N(0, I)."""

    def __init__(self, sched):
        self.sched = sched

    def __call__(self, x_t, y, t):
        return self.sched.sqrt_one_minus_alpha_bar[t] * x_t


class ZeroDenoiser:
    """Predicts no noise at all; handy as a null baseline in tests."""

    def __call__(self, x_t, y, t):
        return np.zeros_like(x_t)


class MapBatch:
    """Paired (x0, y) normalized maps with identical shapes."""

    def __init__(self, x0, y):
        self.x0 = np.asarray(x0, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        require(self.x0.shape == self.y.shape, "x0 / y batch shapes differ")
        require(self.x0.ndim == 3, "batch must be [sample, range, doppler]")
        for name, arr in (("x0", self.x0), ("y", self.y)):
            require(
                np.all(arr >= -1.0) and np.all(arr <= 1.0),
                f"{name} batch must be normalized to [-1, 1]",
            )

    def __len__(self):
        return self.x0.shape[0]

    def pairs(self):
        return zip(self.x0, self.y)
