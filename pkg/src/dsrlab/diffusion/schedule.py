"""Linear variance schedule and its derived tables."""

from dataclasses import dataclass, field

import numpy as np

from ..validation import require

# Full-scale profile used by the reference configuration.
FULL_T = 2000
FULL_BETA_1 = 1e-6
FULL_BETA_T = 0.02

# Desk-scale profile: short chain with matched total noise budget so the
# terminal latent is still effectively pure noise (alpha_bar_T ~ 3e-5).
DESK_T = 200
DESK_BETA_1 = 5e-4
DESK_BETA_T = 0.1


@dataclass
class DiffusionSchedule:
    """Per-step variances beta_t with cached alpha / alpha_bar tables."""

    beta: np.ndarray
    alpha: np.ndarray = field(init=False)
    alpha_bar: np.ndarray = field(init=False)
    alpha_bar_prev: np.ndarray = field(init=False)
    sqrt_alpha_bar: np.ndarray = field(init=False)
    sqrt_one_minus_alpha_bar: np.ndarray = field(init=False)
    beta_tilde: np.ndarray = field(init=False)

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64)
        require(self.beta.ndim == 1 and self.beta.size >= 2, "beta must be a vector, T >= 2")
        require(np.all(self.beta > 0.0) and np.all(self.beta < 1.0), "beta_t must be in (0, 1)")
        require(np.all(np.diff(self.beta) >= 0.0), "beta_t must be non-decreasing")
        self.alpha = 1.0 - self.beta
        self.alpha_bar = np.cumprod(self.alpha)
        self.alpha_bar_prev = np.concatenate(([1.0], self.alpha_bar[:-1]))
        self.sqrt_alpha_bar = np.sqrt(self.alpha_bar)
        self.sqrt_one_minus_alpha_bar = np.sqrt(1.0 - self.alpha_bar)
        # posterior variance of x_{t-1} given (x_t, x_0)
        self.beta_tilde = (1.0 - self.alpha_bar_prev) / (1.0 - self.alpha_bar) * self.beta

    @property
    def T(self):
        return self.beta.size


def make_schedule(T, beta_1, beta_T):
    """Linear beta schedule inclusive of both endpoints."""
    require(T >= 2, "T must be >= 2")
    require(0.0 < beta_1 <= beta_T < 1.0, "need 0 < beta_1 <= beta_T < 1")
    return DiffusionSchedule(beta=np.linspace(beta_1, beta_T, T))


def full_schedule():
    """The reference full-scale schedule (T=2000, 1e-6 .. 0.02)."""
    return make_schedule(FULL_T, FULL_BETA_1, FULL_BETA_T)


def desk_schedule():
    """The desk-scale schedule (T=200, 5e-4 .. 0.1)."""
    return make_schedule(DESK_T, DESK_BETA_1, DESK_BETA_T)
