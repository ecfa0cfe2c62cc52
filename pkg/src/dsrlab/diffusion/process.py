"""Forward noising, noise-prediction loss, and the iterative refinement sampler.

A denoiser is any callable ``(x_t, y, t) -> eps_hat`` on 2-D float arrays,
where ``y`` is the conditioning map carried unchanged through every step.
Everything here is plain numpy and deterministic under a seeded Generator;
the trainable network plugs in through the same callable protocol.
"""

import numpy as np

from ..validation import require


def _check_pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    require(x.shape == y.shape, f"shape mismatch {x.shape} vs {y.shape}")
    return x, y


def forward_sample(x0, t, eps, sched):
    """Closed-form marginal of the noising chain: sqrt(ab)*x0 + sqrt(1-ab)*eps."""
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    require(x0.shape == eps.shape, "x0 and eps shapes differ")
    require(0 <= t < sched.T, f"t={t} outside [0, {sched.T})")
    return sched.sqrt_alpha_bar[t] * x0 + sched.sqrt_one_minus_alpha_bar[t] * eps


def training_loss(denoiser, batch, sched, rng):
    """Mean squared noise-prediction error over a batch of (x0, y) pairs.

    Per pair: draw t uniform in [0, T) and eps standard normal, noise x0 to
    x_t, and score ||eps - denoiser(x_t, y, t)||^2 averaged over cells.
    Deterministic given the rng state.
    """
    total = 0.0
    count = 0
    for x0, y in batch.pairs():
        x0, y = _check_pair(x0, y)
        t = int(rng.integers(0, sched.T))
        eps = rng.standard_normal(x0.shape)
        x_t = forward_sample(x0, t, eps, sched)
        eps_hat = np.asarray(denoiser(x_t, y, t), dtype=np.float64)
        require(eps_hat.shape == x0.shape, "denoiser output shape mismatch")
        total += float(np.mean((eps - eps_hat) ** 2))
        count += 1
    require(count > 0, "empty batch")
    return total / count


def reverse_step(denoiser, x_t, y, t, sched, rng, clip_x0=False):
    """One learned-transition step from x_t to x_{t-1}.

    Mean is (x_t - beta_t/sqrt(1-ab_t) * eps_hat)/sqrt(alpha_t); noise with
    the posterior variance beta_tilde_t is added for t > 0 and omitted at
    t = 0, which makes the final step deterministic.

    ``clip_x0`` rewrites the mean through the implied x0 estimate clamped to
    [-1, 1] (algebraically identical when the estimate is in range). Trained
    desk-scale denoisers mispredict early in the chain and drift out of the
    normalized domain without it; analytic denoisers never need it.
    """
    require(0 <= t < sched.T, f"t={t} outside [0, {sched.T})")
    x_t, y = _check_pair(x_t, y)
    eps_hat = np.asarray(denoiser(x_t, y, t), dtype=np.float64)
    require(eps_hat.shape == x_t.shape, "denoiser output shape mismatch")
    if clip_x0:
        x0_hat = (x_t - sched.sqrt_one_minus_alpha_bar[t] * eps_hat) / sched.sqrt_alpha_bar[t]
        x0_hat = np.clip(x0_hat, -1.0, 1.0)
        coef_x0 = np.sqrt(sched.alpha_bar_prev[t]) * sched.beta[t] / (1.0 - sched.alpha_bar[t])
        coef_xt = np.sqrt(sched.alpha[t]) * (1.0 - sched.alpha_bar_prev[t]) / (
            1.0 - sched.alpha_bar[t]
        )
        mean = coef_x0 * x0_hat + coef_xt * x_t
    else:
        mean = (x_t - sched.beta[t] / sched.sqrt_one_minus_alpha_bar[t] * eps_hat) / np.sqrt(
            sched.alpha[t]
        )
    if t == 0:
        return mean
    return mean + np.sqrt(sched.beta_tilde[t]) * rng.standard_normal(x_t.shape)


def sample(denoiser, y, sched, rng, clip=True, clip_x0=False):
    """Run the full refinement chain from pure noise, conditioned on y.

    Starts at x_T ~ N(0, I) and applies reverse_step for t = T-1 .. 0.
    ``clip`` bounds the result to [-1, 1], the normalized-map contract;
    disable it to study the unclipped chain (e.g. moment checks against
    analytic denoisers). ``clip_x0`` is forwarded to every reverse_step.
    """
    y = np.asarray(y, dtype=np.float64)
    x = rng.standard_normal(y.shape)
    for t in range(sched.T - 1, -1, -1):
        x = reverse_step(denoiser, x, y, t, sched, rng, clip_x0=clip_x0)
    return np.clip(x, -1.0, 1.0) if clip else x
