"""Slow-time data cube simulation for point targets and near-stationary clutter.

The simulated scene is a pulse-Doppler radar with a small uniform linear
array. Range is synthesized directly on a fixed bin grid (no fast-time
modeling); the slow-time axis carries the Doppler information that the rest
of the package resolves, degrades and super-resolves.
"""

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .validation import require, check_seed

TWO_PI = 2.0 * math.pi


@dataclass
class ScenarioConfig:
    """Physical constants, grid sizes and truth distributions for one scene.

    The velocity grid is defined by ``n_pulses`` and ``vel_res``; the pulse
    repetition interval is derived as ``wavelength / (2 * n_pulses * vel_res)``
    so that grid is met exactly. ``snr_db`` is the per-cell SNR of the weakest
    target before Doppler integration; ``None`` disables noise.
    """

    n_pulses: int = 128
    n_range: int = 128
    range_res: float = 0.75
    vel_res: float = 0.23
    max_range: float = 96.0
    carrier_wavelength: float = 0.03
    n_elements: int = 2
    element_spacing: float = 0.12
    n_targets: int = 3
    n_clutter: int = 3
    snr_db: float | None = 0.0
    clutter_to_target_db: float = 10.0
    clutter_vel_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        require(self.n_pulses >= 1, "n_pulses must be >= 1")
        require(self.n_range >= 1, "n_range must be >= 1")
        require(self.n_elements >= 1, "n_elements must be >= 1")
        require(self.n_targets >= 0, "n_targets must be >= 0")
        require(self.n_clutter >= 0, "n_clutter must be >= 0")
        require(self.range_res > 0, "range_res must be > 0")
        require(self.vel_res > 0, "vel_res must be > 0")
        require(self.carrier_wavelength > 0, "carrier_wavelength must be > 0")
        require(self.element_spacing > 0, "element_spacing must be > 0")
        require(self.clutter_vel_sigma >= 0, "clutter_vel_sigma must be >= 0")
        require(
            math.isclose(self.n_range * self.range_res, self.max_range, rel_tol=1e-9),
            f"n_range * range_res must equal max_range "
            f"({self.n_range} * {self.range_res} != {self.max_range})",
        )
        self.seed = check_seed(self.seed)

    @property
    def pri(self):
        """Pulse repetition interval in seconds."""
        return self.carrier_wavelength / (2.0 * self.n_pulses * self.vel_res)

    @property
    def velocity_span(self):
        """Unambiguous velocity span in m/s (symmetric about zero)."""
        return self.n_pulses * self.vel_res

    def to_json(self):
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        require(isinstance(data, dict), "scenario config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        require(not unknown, f"unknown scenario config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass
class Scatterer:
    """One point reflector: either a moving target or near-stationary clutter."""

    range_bin: int
    velocity: float
    amplitude: float
    phase: float
    kind: str = "target"  # "target" | "clutter"

    def __post_init__(self):
        require(self.amplitude > 0, "amplitude must be > 0")
        require(self.kind in ("target", "clutter"), f"bad scatterer kind {self.kind!r}")
        self.phase = float(self.phase) % TWO_PI


@dataclass
class SlowTimeCube:
    """Complex baseband samples indexed [pulse, range bin, element]."""

    data: np.ndarray
    pri: float
    wavelength: float

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        require(self.data.ndim == 3, "cube data must be [pulse, range, element]")
        require(np.all(np.isfinite(self.data.view(np.float64))), "cube has non-finite entries")
        require(self.pri > 0, "pri must be > 0")
        require(self.wavelength > 0, "wavelength must be > 0")

    @property
    def n_pulses(self):
        return self.data.shape[0]

    @property
    def n_range(self):
        return self.data.shape[1]

    @property
    def n_elements(self):
        return self.data.shape[2]


def _check_velocity(v, span):
    require(abs(v) < span / 2.0, f"velocity {v} outside unambiguous span ±{span / 2.0}")


def cube_from_scatterers(cfg, scatterers):
    """Build a noiseless cube from an explicit scatterer list.

    Each scatterer adds, at its range bin, the slow-time phasor
    ``a * exp(j*(phi + 2*pi*(2*v/lambda)*m*PRI))`` on every element
    (broadside geometry: no inter-element phase). Contributions sum
    linearly, so cube(A + B) == cube(A) + cube(B).
    """
    data = np.zeros((cfg.n_pulses, cfg.n_range, cfg.n_elements), dtype=np.complex128)
    m = np.arange(cfg.n_pulses)
    for s in scatterers:
        require(0 <= s.range_bin < cfg.n_range, f"range_bin {s.range_bin} out of grid")
        _check_velocity(s.velocity, cfg.velocity_span)
        doppler_hz = 2.0 * s.velocity / cfg.carrier_wavelength
        phasor = s.amplitude * np.exp(1j * (s.phase + TWO_PI * doppler_hz * m * cfg.pri))
        data[:, s.range_bin, :] += phasor[:, None]
    return SlowTimeCube(data=data, pri=cfg.pri, wavelength=cfg.carrier_wavelength)


def draw_scatterers(cfg, rng):
    """Draw the random scene truth for a config: targets plus clutter.

    Targets get uniform range bins, uniform velocities over the unambiguous
    span and uniform amplitudes in [0.5, 1]. Clutter rides at near-zero
    velocity (Gaussian, sigma = clutter_vel_sigma) with amplitude
    clutter_to_target_db above the mean target amplitude.
    """
    scatterers = []
    amps = rng.uniform(0.5, 1.0, size=cfg.n_targets)
    for i in range(cfg.n_targets):
        scatterers.append(
            Scatterer(
                range_bin=int(rng.integers(0, cfg.n_range)),
                velocity=float(rng.uniform(-0.499, 0.499) * cfg.velocity_span),
                amplitude=float(amps[i]),
                phase=float(rng.uniform(0.0, TWO_PI)),
                kind="target",
            )
        )
    mean_amp = float(np.mean(amps)) if cfg.n_targets else 1.0
    clutter_amp = mean_amp * 10.0 ** (cfg.clutter_to_target_db / 20.0)
    half = cfg.velocity_span / 2.0
    for _ in range(cfg.n_clutter):
        v = float(rng.normal(0.0, cfg.clutter_vel_sigma))
        v = float(np.clip(v, -0.999 * half, 0.999 * half))
        scatterers.append(
            Scatterer(
                range_bin=int(rng.integers(0, cfg.n_range)),
                velocity=v,
                amplitude=clutter_amp,
                phase=float(rng.uniform(0.0, TWO_PI)),
                kind="clutter",
            )
        )
    return scatterers


def add_noise(cube, cfg, rng, scatterers):
    """Add complex white Gaussian noise at cfg.snr_db below the weakest target."""
    if cfg.snr_db is None:
        return cube
    targets = [s for s in scatterers if s.kind == "target"] or list(scatterers)
    require(targets, "cannot set a noise level without any scatterer")
    a_min = min(s.amplitude for s in targets)
    noise_power = a_min**2 / 10.0 ** (cfg.snr_db / 10.0)
    sigma = math.sqrt(noise_power / 2.0)
    noise = sigma * (
        rng.standard_normal(cube.data.shape) + 1j * rng.standard_normal(cube.data.shape)
    )
    return SlowTimeCube(data=cube.data + noise, pri=cube.pri, wavelength=cube.wavelength)


def simulate_datacube(cfg, scatterers=None):
    """Simulate one scene: returns (cube, scatterer truth list).

    Deterministic given cfg.seed. A pre-built scatterer list may be passed to
    pin the scene geometry; noise is still drawn from the seeded stream.
    """
    require(
        cfg.n_targets + cfg.n_clutter > 0 or scatterers,
        "scene needs at least one scatterer (n_targets + n_clutter = 0)",
    )
    rng = np.random.default_rng(cfg.seed)
    if scatterers is None:
        scatterers = draw_scatterers(cfg, rng)
    require(len(scatterers) > 0, "scene needs at least one scatterer")
    cube = cube_from_scatterers(cfg, scatterers)
    cube = add_noise(cube, cfg, rng, scatterers)
    return cube, list(scatterers)


def truncate_integration(cube, factor):
    """Degrade Doppler resolution by keeping only the first 1/factor of pulses.

    factor 1 is the identity. The PRI is unchanged, so the unambiguous span
    is preserved while the effective velocity resolution coarsens by factor.
    """
    require(factor >= 1, f"factor must be >= 1, got {factor}")
    require(factor in (1, 2, 4, 8), f"factor must be one of 1, 2, 4, 8, got {factor}")
    require(
        cube.n_pulses % factor == 0,
        f"n_pulses {cube.n_pulses} not divisible by factor {factor}",
    )
    if factor == 1:
        return cube
    keep = cube.n_pulses // factor
    return SlowTimeCube(
        data=cube.data[:keep].copy(), pri=cube.pri, wavelength=cube.wavelength
    )


def velocity_to_doppler_bin(v, n_doppler, vel_res_effective):
    """Map a velocity to its fractional Doppler bin (zero velocity at n/2)."""
    require(vel_res_effective > 0, "vel_res_effective must be > 0")
    require(
        abs(v) < n_doppler * vel_res_effective / 2.0,
        f"velocity {v} outside the span of a {n_doppler}-bin grid "
        f"at {vel_res_effective} m/s per bin",
    )
    return n_doppler / 2.0 + v / vel_res_effective


def doppler_bin_to_velocity(bin_index, n_doppler, vel_res_effective):
    """Inverse of velocity_to_doppler_bin."""
    return (bin_index - n_doppler / 2.0) * vel_res_effective
