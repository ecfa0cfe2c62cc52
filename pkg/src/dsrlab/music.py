"""MUSIC pseudospectrum over slow time, per range bin.

A single coherent pulse train gives one snapshot per range bin, so the
covariance is estimated by forward-backward spatial smoothing over
overlapping subvectors. The noise-subspace projector then yields the usual
pseudospectrum peaks past the Rayleigh limit of the plain FFT.
"""

from dataclasses import dataclass

import numpy as np

from .spectral import RDMap
from .validation import require


@dataclass
class CovarianceEstimate:
    """Hermitian smoothed sample covariance of slow-time subvectors."""

    matrix: np.ndarray
    n_snapshots: int
    smoothing_len: int

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        require(self.matrix.ndim == 2, "covariance must be a matrix")
        L = self.matrix.shape[0]
        require(self.matrix.shape == (L, L), "covariance must be square")
        require(L == self.smoothing_len, "smoothing_len must match matrix size")
        hermiticity = np.max(np.abs(self.matrix - self.matrix.conj().T))
        scale = max(np.abs(np.trace(self.matrix)), 1.0)
        require(hermiticity <= 1e-10 * scale, "covariance is not Hermitian")


def smoothed_covariance(slow_time, smoothing_len):
    """Forward-backward spatially smoothed covariance from one slow-time vector.

    Uses the N-L+1 overlapping length-L subvectors and their conjugate
    reversals; the averaging restores rank for coherent tones, which is what
    a deterministic multi-target pulse train produces.
    """
    x = np.asarray(slow_time, dtype=np.complex128).ravel()
    n = x.size
    L = int(smoothing_len)
    require(L >= 2, "smoothing_len must be >= 2")
    require(L <= n, f"smoothing_len {L} exceeds vector length {n}")
    snaps = np.lib.stride_tricks.sliding_window_view(x, L)  # (n-L+1, L)
    a = snaps.T
    r_fwd = (a @ a.conj().T) / snaps.shape[0]
    exchange = np.eye(L)[::-1]
    r_fb = 0.5 * (r_fwd + exchange @ r_fwd.conj() @ exchange)
    r_fb = 0.5 * (r_fb + r_fb.conj().T)  # kill residual asymmetry
    return CovarianceEstimate(matrix=r_fb, n_snapshots=2 * snaps.shape[0], smoothing_len=L)


def steering_vector(f, length):
    """Unit-step steering vector a(f) = [1, e^{j2pi f}, ..., e^{j2pi f (L-1)}]."""
    return np.exp(2j * np.pi * f * np.arange(length))


def music_pseudospectrum(cov, n_sources, grid):
    """Noise-subspace pseudospectrum on a centered frequency grid.

    Frequencies are f_m = (m - G/2)/G cycles per sample, m in [0, G), matching
    the zero-Doppler-at-center map convention. A small trace-relative epsilon
    regularizes the projector denominator near exact orthogonality.
    """
    L = cov.smoothing_len
    require(1 <= n_sources < L, f"n_sources must be in [1, {L - 1}], got {n_sources}")
    evals, evecs = np.linalg.eigh(cov.matrix)
    trace = float(np.sum(evals))
    require(evals[0] >= -1e-9 * max(abs(trace), 1.0), "covariance not PSD")
    noise_basis = evecs[:, : L - n_sources]
    f = (np.arange(grid) - grid / 2.0) / grid
    manifold = np.exp(2j * np.pi * np.outer(np.arange(L), f))
    proj = noise_basis.conj().T @ manifold
    denom = np.sum(np.abs(proj) ** 2, axis=0)
    eps = 1e-12 * abs(trace)
    return 1.0 / (denom + eps)


def music_rd_map(cube, grid, order=2, element=0, smoothing_len=None):
    """MUSIC pseudospectrum map over all range bins, energy-rescaled per bin.

    ``order`` is either a global source count or a per-range-bin sequence
    (entries clamped to [1, L-1]). Pseudospectrum magnitudes are arbitrary,
    so each row is rescaled to its slow-time energy to keep the map
    CFAR-consumable and renderable next to FFT maps.
    """
    require(cube.n_pulses >= 4, "cube too short for smoothing")
    n = cube.n_pulses
    L = smoothing_len if smoothing_len is not None else max(2, n // 2)
    if np.isscalar(order):
        orders = np.full(cube.n_range, int(order))
    else:
        orders = np.asarray(order, dtype=int)
        require(orders.shape == (cube.n_range,), "per-bin order length mismatch")
    orders = np.clip(orders, 1, L - 1)
    values = np.zeros((cube.n_range, grid))
    for r in range(cube.n_range):
        x = cube.data[:, r, element]
        cov = smoothed_covariance(x, L)
        p = music_pseudospectrum(cov, int(orders[r]), grid)
        energy = float(np.sum(np.abs(x) ** 2))
        total = float(np.sum(p))
        values[r] = p * (energy / total) if total > 0 else 0.0
    return RDMap(values=values, domain="linear")
