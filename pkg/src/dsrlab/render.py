"""Dependency-free heatmap rendering of RD maps to binary P6 pixmaps."""

from pathlib import Path

import numpy as np

from .validation import require

# viridis-like ramp, interpolated between fixed RGB anchors
_ANCHORS = np.array(
    [
        (68, 1, 84),
        (71, 44, 122),
        (59, 81, 139),
        (44, 113, 142),
        (33, 144, 141),
        (39, 173, 129),
        (92, 200, 99),
        (170, 220, 50),
        (253, 231, 37),
    ],
    dtype=np.float64,
)


def _colormap(x):
    """Map values in [0, 1] to RGB uint8 via the anchor ramp."""
    x = np.clip(x, 0.0, 1.0)
    pos = x * (len(_ANCHORS) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(_ANCHORS) - 1)
    frac = (pos - lo)[..., None]
    rgb = _ANCHORS[lo] * (1.0 - frac) + _ANCHORS[hi] * frac
    return np.clip(np.round(rgb), 0, 255).astype(np.uint8)


def _relative_db(rd_map, db_span):
    """Peak-relative dB image of a map in any domain."""
    v = rd_map.values
    if rd_map.domain == "linear":
        peak = v.max()
        require(peak > 0, "cannot render an all-zero linear map")
        with np.errstate(divide="ignore"):
            rel = 10.0 * np.log10(np.maximum(v / peak, 10.0 ** (-db_span / 10.0 - 3)))
    elif rd_map.domain == "log_db":
        rel = v - v.max()
    else:  # normalized: [-1, 1] spans [floor_db, 0]
        rel = (v + 1.0) / 2.0 * (0.0 - rd_map.floor_db) + rd_map.floor_db
    return np.maximum(rel, -db_span)


def map_to_rgb(rd_map, db_span=60.0):
    """RGB image of one map, peak-relative over db_span decibels."""
    rel = _relative_db(rd_map, db_span)
    return _colormap(1.0 + rel / db_span)


def write_p6(path, rgb):
    """Write an RGB uint8 array [h, w, 3] as a binary P6 pixmap."""
    require(rgb.ndim == 3 and rgb.shape[2] == 3, "expect [h, w, 3] RGB")
    h, w = rgb.shape[:2]
    with Path(path).open("wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.astype(np.uint8).tobytes(order="C"))
    return Path(path)


def _add_axes_margin(rgb, tick_every=16):
    """Frame the image with a margin carrying tick marks (no text)."""
    h, w = rgb.shape[:2]
    margin = 12
    out = np.full((h + margin, w + margin, 3), 255, dtype=np.uint8)
    out[:h, margin:] = rgb
    for d in range(0, w, tick_every):
        out[h : h + 4, margin + d] = 0
    for r in range(0, h, tick_every):
        out[r, margin - 4 : margin] = 0
    out[h, margin:] = 0
    out[:h, margin - 1] = 0
    return out


def render_heatmap(rd_map, out_path, db_span=60.0, axes=False):
    """Render one RD map to a P6 file; returns the written path."""
    rgb = map_to_rgb(rd_map, db_span=db_span)
    if axes:
        rgb = _add_axes_margin(rgb)
    return write_p6(out_path, rgb)


def render_panels(maps, out_path, db_span=60.0, gap=2):
    """Concatenate maps horizontally (caller fixes the panel order).

    Each panel is scaled to its own peak. Panels must share the range
    dimension; a white gap separates them.
    """
    require(len(maps) >= 1, "need at least one map")
    panels = [map_to_rgb(m, db_span=db_span) for m in maps]
    h = panels[0].shape[0]
    require(all(p.shape[0] == h for p in panels), "panels must share n_range")
    spacer = np.full((h, gap, 3), 255, dtype=np.uint8)
    row = []
    for i, p in enumerate(panels):
        if i:
            row.append(spacer)
        row.append(p)
    return write_p6(out_path, np.concatenate(row, axis=1))


def write_png(path, rgb):
    """Optional PNG export (requires Pillow)."""
    try:
        from PIL import Image
    except ImportError as exc:
        raise RuntimeError("PNG export needs Pillow (pip install dsrlab[png])") from exc
    Image.fromarray(rgb, mode="RGB").save(path)
    return Path(path)
