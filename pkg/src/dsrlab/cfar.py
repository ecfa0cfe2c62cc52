"""2-D cell-averaging CFAR detection on linear-power RD maps."""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .validation import require


@dataclass
class CfarConfig:
    """Window geometry and design false-alarm probability.

    ``guard`` and ``train`` are cells per side per dimension. ``boundary``
    is "clip" (training ring truncated at edges, mean over available cells)
    or "wrap" (circular in Doppler only; range still clips).
    """

    guard: int = 2
    train: int = 4
    pfa: float = 1e-3
    boundary: str = "clip"

    def __post_init__(self):
        require(self.guard >= 0, "guard must be >= 0")
        require(self.train >= 1, "train must be >= 1")
        require(0.0 < self.pfa < 1.0, "pfa must be in (0, 1)")
        require(self.boundary in ("clip", "wrap"), f"bad boundary {self.boundary!r}")


@dataclass
class DetectionList:
    """CFAR hits as (range bin, Doppler bin, cell value, threshold) rows."""

    detections: list = field(default_factory=list)

    def __len__(self):
        return len(self.detections)

    def __iter__(self):
        return iter(self.detections)

    def indices(self):
        return [(r, d) for (r, d, _, _) in self.detections]

    def to_json_rows(self):
        return [
            {"r": int(r), "d": int(d), "value": float(v), "threshold": float(t)}
            for (r, d, v, t) in self.detections
        ]


def threshold_factor(n_train, pfa):
    """CA-CFAR scaling alpha = N (pfa^(-1/N) - 1) for exponential noise."""
    n = np.asarray(n_train, dtype=np.float64)
    require(np.all(n >= 1), "n_train must be >= 1")
    require(0.0 < pfa < 1.0, "pfa must be in (0, 1)")
    out = n * (pfa ** (-1.0 / n) - 1.0)
    return float(out) if np.isscalar(n_train) else out


def _ring_sums(values, cfg):
    """Training-ring sums and counts per cell via box-filter differences."""
    w = cfg.guard + cfg.train
    if cfg.boundary == "wrap":
        padded = np.pad(values, ((0, 0), (w, w)), mode="wrap")
    else:
        padded = values
    full = np.ones((2 * w + 1, 2 * w + 1))
    guard = np.ones((2 * cfg.guard + 1, 2 * cfg.guard + 1))
    ones = np.ones_like(padded)
    sum_train = ndimage.correlate(padded, full, mode="constant") - ndimage.correlate(
        padded, guard, mode="constant"
    )
    cnt_train = ndimage.correlate(ones, full, mode="constant") - ndimage.correlate(
        ones, guard, mode="constant"
    )
    if cfg.boundary == "wrap":
        sum_train = sum_train[:, w:-w]
        cnt_train = cnt_train[:, w:-w]
    return sum_train, cnt_train


def ca_cfar_2d(rd_map, cfg=None):
    """Run 2-D CA-CFAR over every cell of a linear-power map.

    Each cell is compared against alpha(N) times the mean of its training
    ring, with alpha recomputed per cell from the number of training cells
    actually available under the boundary policy. Detections come back in
    row-major order.
    """
    cfg = cfg or CfarConfig()
    require(rd_map.domain == "linear", "CFAR needs a linear-power map")
    side = 2 * (cfg.guard + cfg.train) + 1
    require(
        rd_map.n_range >= side and rd_map.n_doppler >= side,
        f"map {rd_map.values.shape} smaller than CFAR window {side}x{side}",
    )
    values = rd_map.values
    sum_train, cnt_train = _ring_sums(values, cfg)
    alpha = threshold_factor(cnt_train, cfg.pfa)
    thresholds = alpha * sum_train / cnt_train
    hits = values > thresholds
    rows = [
        (int(r), int(d), float(values[r, d]), float(thresholds[r, d]))
        for r, d in np.argwhere(hits)
    ]
    return DetectionList(detections=rows)


def group_detections(dets, rd_map):
    """Merge 8-connected detection clusters, keeping each cluster's peak cell.

    Point targets light up small blobs under CFAR; reporting one hit per blob
    mirrors point detections. Returns a new DetectionList.
    """
    if not dets.detections:
        return DetectionList(detections=[])
    mask = np.zeros(rd_map.values.shape, dtype=bool)
    meta = {}
    for r, d, v, t in dets.detections:
        mask[r, d] = True
        meta[(r, d)] = (v, t)
    labels, n_labels = ndimage.label(mask, structure=np.ones((3, 3)))
    rows = []
    for lab in range(1, n_labels + 1):
        cells = np.argwhere(labels == lab)
        peak = max(cells, key=lambda c: rd_map.values[c[0], c[1]])
        r, d = int(peak[0]), int(peak[1])
        v, t = meta[(r, d)]
        rows.append((r, d, v, t))
    rows.sort()
    return DetectionList(detections=rows)
