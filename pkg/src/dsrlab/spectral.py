"""Slow-time spectral processing: windowing, zero-padded FFT maps, scaling.

Produces range-Doppler maps in three domains:

* ``linear``      squared-magnitude power, what CFAR consumes
* ``log_db``      dB, either absolute or peak-relative depending on origin
* ``normalized``  peak-relative dB affinely mapped onto [-1, 1], the domain
                  the diffusion network requires

The normalized domain is invertible above the clip floor via NormParams.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .validation import require, is_power_of_two

DOMAINS = ("linear", "log_db", "normalized")


@dataclass
class NormParams:
    """Record of a per-map normalization so it can be undone exactly."""

    peak_db: float
    floor_db: float

    def __post_init__(self):
        require(self.floor_db < 0.0, "floor_db is peak-relative and must be < 0")


@dataclass
class RDMap:
    """Real-valued range x Doppler grid with a domain tag.

    ``values[r, d]`` is row-major with range as the leading axis. For
    non-linear domains ``floor_db`` is the peak-relative clip floor.
    """

    values: np.ndarray
    domain: str = "linear"
    floor_db: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        require(self.values.ndim == 2, "map values must be 2-D [range, doppler]")
        require(np.all(np.isfinite(self.values)), "map has non-finite entries")
        require(self.domain in DOMAINS, f"unknown domain {self.domain!r}")
        if self.domain == "linear":
            require(np.all(self.values >= 0.0), "linear map must be non-negative")
        elif self.domain == "normalized":
            require(
                np.all(self.values >= -1.0) and np.all(self.values <= 1.0),
                "normalized map must lie in [-1, 1]",
            )
        if self.domain != "linear":
            require(self.floor_db is not None, f"{self.domain} map needs floor_db")

    @property
    def n_range(self):
        return self.values.shape[0]

    @property
    def n_doppler(self):
        return self.values.shape[1]


def blackman_window(n):
    """Symmetric Blackman taper: 0.42 - 0.5 cos(2 pi k/(n-1)) + 0.08 cos(4 pi k/(n-1))."""
    require(n >= 2, "window length must be >= 2")
    k = np.arange(n)
    return 0.42 - 0.5 * np.cos(2.0 * np.pi * k / (n - 1)) + 0.08 * np.cos(4.0 * np.pi * k / (n - 1))


def rd_map_from_cube(cube, pad_to, window=True, element=0):
    """Doppler-process one array element into a linear-power RD map.

    Per range bin the slow-time vector is (optionally) Blackman-tapered,
    zero-padded to ``pad_to``, FFT'd and center-shifted so zero Doppler lands
    at column pad_to/2. Values are squared magnitudes.
    """
    n = cube.n_pulses
    require(pad_to >= n, f"pad_to {pad_to} must be >= n_pulses {n}")
    require(is_power_of_two(pad_to), f"pad_to must be a power of two, got {pad_to}")
    require(0 <= element < cube.n_elements, f"element {element} out of range")
    slow = cube.data[:, :, element]  # [pulse, range]
    if window:
        slow = slow * blackman_window(n)[:, None]
    spec = np.fft.fft(slow, n=pad_to, axis=0)
    spec = np.fft.fftshift(spec, axes=0)
    return RDMap(values=(np.abs(spec) ** 2).T, domain="linear")


def to_log_normalized(rd_map, floor_db=-60.0):
    """Convert a linear map to peak-relative dB clipped at floor_db, then [-1, 1].

    Returns (normalized map, NormParams); denormalize() undoes the affine
    stage exactly, recovering the clipped absolute-dB map.
    """
    require(rd_map.domain == "linear", "to_log_normalized expects a linear map")
    require(floor_db < 0.0, "floor_db must be < 0 (relative to peak)")
    peak = float(rd_map.values.max())
    require(peak > 0.0, "cannot normalize an all-zero map")
    with np.errstate(divide="ignore"):
        rel_db = 10.0 * np.log10(rd_map.values / peak)
    rel_db = np.maximum(rel_db, floor_db)
    norm = (rel_db - floor_db) / (0.0 - floor_db) * 2.0 - 1.0
    params = NormParams(peak_db=10.0 * np.log10(peak), floor_db=floor_db)
    return RDMap(values=norm, domain="normalized", floor_db=floor_db), params


def denormalize(rd_map, params):
    """Invert the affine stage of to_log_normalized, returning absolute dB."""
    require(rd_map.domain == "normalized", "denormalize expects a normalized map")
    v = rd_map.values
    require(np.all(v >= -1.0) and np.all(v <= 1.0), "normalized values out of [-1, 1]")
    rel_db = (v + 1.0) / 2.0 * (0.0 - params.floor_db) + params.floor_db
    return RDMap(values=params.peak_db + rel_db, domain="log_db", floor_db=params.floor_db)


def log_db_to_linear(rd_map):
    """Convert a dB map back to linear power (10^(dB/10))."""
    require(rd_map.domain == "log_db", "expects a log_db map")
    return RDMap(values=10.0 ** (rd_map.values / 10.0), domain="linear")


def save_rdmap(path, rd_map, params=None):
    """Write raw little-endian float32 (row-major, range-major) plus a JSON sidecar."""
    path = Path(path)
    path.write_bytes(rd_map.values.astype("<f4").tobytes(order="C"))
    sidecar = {
        "shape": list(rd_map.values.shape),
        "domain": rd_map.domain,
        "floor_db": rd_map.floor_db,
        "norm": None if params is None else {"peak_db": params.peak_db, "floor_db": params.floor_db},
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2))
    return path


def load_rdmap(path):
    """Read a raw map written by save_rdmap. Returns (RDMap, NormParams | None)."""
    path = Path(path)
    sidecar = json.loads(Path(str(path) + ".json").read_text())
    shape = tuple(sidecar["shape"])
    values = np.frombuffer(path.read_bytes(), dtype="<f4").reshape(shape).astype(np.float64)
    params = None
    if sidecar.get("norm") is not None:
        params = NormParams(**sidecar["norm"])
    return RDMap(values=values, domain=sidecar["domain"], floor_db=sidecar["floor_db"]), params
