"""Dataset generation, detection matching and method comparison reports."""

import csv
import json
from dataclasses import dataclass, asdict, replace, field
from pathlib import Path

import numpy as np

from . import cfar as cfar_mod
from .scenario import (
    ScenarioConfig,
    Scatterer,
    simulate_datacube,
    truncate_integration,
    velocity_to_doppler_bin,
)
from .spectral import (
    rd_map_from_cube,
    to_log_normalized,
    denormalize,
    log_db_to_linear,
    save_rdmap,
    load_rdmap,
    NormParams,
)
from .music import music_rd_map
from .validation import require

DEFAULT_TOL = (1, 2)  # range bins, Doppler bins


@dataclass
class DatasetRecord:
    """One (sample, factor) pair of the dataset with its truth and map files."""

    sample_id: int
    factor: int
    config: dict
    scatterers: list
    scene: str  # "drawn" (from config seed) | "explicit" (scatterers pinned)
    hr_path: str
    lr_path: str
    sr_fft_path: str
    hr_norm: dict
    lr_norm: dict
    sr_fft_norm: dict
    domain: str = "normalized"

    def scenario(self):
        return ScenarioConfig(**self.config)

    def truth(self):
        return [Scatterer(**s) for s in self.scatterers]


@dataclass
class MatchReport:
    """Assignment of CFAR detections against scatterer truth."""

    tp: int
    fn: int
    false_alarms: int
    clutter_hits: int
    distances: list = field(default_factory=list)

    @property
    def recall(self):
        total = self.tp + self.fn
        return self.tp / total if total else 1.0

    @property
    def precision(self):
        claimed = self.tp + self.false_alarms
        return self.tp / claimed if claimed else 1.0


def generate_dataset(
    cfg_template,
    n_samples,
    factors,
    out_dir,
    seed,
    window=True,
    scatterer_sampler=None,
):
    """Write paired HR / LR / SR-FFT normalized maps plus a manifest.

    Per sample: simulate the HR cube, map it at full Doppler size, truncate
    per factor for the LR map (native n_pulses/factor Doppler bins) and
    zero-pad the truncated slow time back to full size for the SR-FFT map.
    Each map is log-normalized with its own recorded NormParams. Fully
    deterministic given ``seed``; per-sample seeds are derived so samples are
    independent of generation order.

    ``scatterer_sampler(cfg)`` may pin scene geometry (e.g. a fixed-separation
    target pair); otherwise scenes are drawn from the config distributions.
    """
    require(n_samples >= 1, "n_samples must be >= 1")
    factors = [int(f) for f in (factors if hasattr(factors, "__iter__") else [factors])]
    require(all(f in (1, 2, 4, 8) for f in factors), f"bad factors {factors}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    master = np.random.default_rng(seed)
    sample_seeds = master.integers(0, 2**63 - 1, size=n_samples)

    records = []
    for i in range(n_samples):
        cfg_i = replace(cfg_template, seed=int(sample_seeds[i]))
        if scatterer_sampler is not None:
            scene = "explicit"
            cube, truth = simulate_datacube(cfg_i, scatterers=scatterer_sampler(cfg_i))
        else:
            scene = "drawn"
            cube, truth = simulate_datacube(cfg_i)

        hr_map = rd_map_from_cube(cube, pad_to=cfg_i.n_pulses, window=window)
        hr_norm_map, hr_params = to_log_normalized(hr_map)
        hr_path = out_dir / f"s{i:05d}_hr.f32"
        save_rdmap(hr_path, hr_norm_map, hr_params)

        for f in factors:
            lr_cube = truncate_integration(cube, f)
            lr_map = rd_map_from_cube(lr_cube, pad_to=cfg_i.n_pulses // f, window=window)
            sr_map = rd_map_from_cube(lr_cube, pad_to=cfg_i.n_pulses, window=window)
            lr_norm_map, lr_params = to_log_normalized(lr_map)
            sr_norm_map, sr_params = to_log_normalized(sr_map)
            lr_path = out_dir / f"s{i:05d}_f{f}_lr.f32"
            sr_path = out_dir / f"s{i:05d}_f{f}_srfft.f32"
            save_rdmap(lr_path, lr_norm_map, lr_params)
            save_rdmap(sr_path, sr_norm_map, sr_params)
            records.append(
                DatasetRecord(
                    sample_id=i,
                    factor=f,
                    config=asdict(cfg_i),
                    scatterers=[asdict(s) for s in truth],
                    scene=scene,
                    hr_path=hr_path.name,
                    lr_path=lr_path.name,
                    sr_fft_path=sr_path.name,
                    hr_norm=asdict(hr_params),
                    lr_norm=asdict(lr_params),
                    sr_fft_norm=asdict(sr_params),
                )
            )

    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps([asdict(r) for r in records], indent=2))
    return manifest_path


def load_manifest(manifest_path):
    """Read a manifest back into DatasetRecord objects."""
    data = json.loads(Path(manifest_path).read_text())
    require(isinstance(data, list), "manifest must be a JSON array")
    return [DatasetRecord(**entry) for entry in data]


def split_records(records, test_every=10):
    """90/10 train/test split by sample index (every 10th sample is test)."""
    train = [r for r in records if r.sample_id % test_every != test_every - 1]
    test = [r for r in records if r.sample_id % test_every == test_every - 1]
    return train, test


def rebuild_cube(record):
    """Re-simulate a record's cube bit-exactly from its config snapshot."""
    cfg = record.scenario()
    if record.scene == "explicit":
        cube, _ = simulate_datacube(cfg, scatterers=record.truth())
    else:
        cube, _ = simulate_datacube(cfg)
    return cube


def match_detections(dets, truth, n_doppler, vel_res, tol=DEFAULT_TOL):
    """Greedy nearest-neighbor assignment of detections to target truth.

    Targets within ``tol = (range bins, Doppler bins)`` of a detection can be
    matched, each at most once. Unmatched detections near clutter are reported
    separately and excluded from false alarms; the rest are false alarms
    (hallucinations).
    """
    require(tol[0] >= 0 and tol[1] >= 0, "tolerances must be >= 0")
    targets = [s for s in truth if s.kind == "target"]
    clutter = [s for s in truth if s.kind == "clutter"]

    def bin_of(s):
        return (s.range_bin, velocity_to_doppler_bin(s.velocity, n_doppler, vel_res))

    det_cells = dets.indices() if hasattr(dets, "indices") else list(dets)
    target_bins = [bin_of(s) for s in targets]
    clutter_bins = [bin_of(s) for s in clutter]

    candidates = []
    for di, (r, d) in enumerate(det_cells):
        for ti, (tr, td) in enumerate(target_bins):
            if abs(r - tr) <= tol[0] and abs(d - td) <= tol[1]:
                dist = float(np.hypot(r - tr, d - td))
                candidates.append((dist, di, ti))
    candidates.sort()

    used_d, used_t, distances = set(), set(), []
    for dist, di, ti in candidates:
        if di in used_d or ti in used_t:
            continue
        used_d.add(di)
        used_t.add(ti)
        distances.append(dist)

    clutter_hits = 0
    false_alarms = 0
    for di, (r, d) in enumerate(det_cells):
        if di in used_d:
            continue
        near_clutter = any(
            abs(r - cr) <= tol[0] and abs(d - cd) <= tol[1] for (cr, cd) in clutter_bins
        )
        if near_clutter:
            clutter_hits += 1
        else:
            false_alarms += 1

    return MatchReport(
        tp=len(used_t),
        fn=len(targets) - len(used_t),
        false_alarms=false_alarms,
        clutter_hits=clutter_hits,
        distances=distances,
    )


def psnr(a, b):
    """Peak signal-to-noise ratio in dB for normalized maps (peak-to-peak 2)."""
    a = np.asarray(getattr(a, "values", a), dtype=np.float64)
    b = np.asarray(getattr(b, "values", b), dtype=np.float64)
    require(a.shape == b.shape, f"shape mismatch {a.shape} vs {b.shape}")
    for arr in (a, b):
        require(np.all(arr >= -1.0) and np.all(arr <= 1.0), "psnr expects values in [-1, 1]")
    mse = float(np.mean((a - b) ** 2))
    if mse < 1e-15:
        return 150.0
    return min(150.0, 10.0 * np.log10(4.0 / mse))


def _sr_maps_for_method(records, method, base_dir, checkpoint=None, seed=0):
    """Produce the denormalized linear SR map per record for one method."""
    base_dir = Path(base_dir)
    maps = []
    if method == "fft":
        for rec in records:
            norm_map, params = load_rdmap(base_dir / rec.sr_fft_path)
            maps.append(log_db_to_linear(denormalize(norm_map, params)))
    elif method == "music":
        for rec in records:
            cfg = rec.scenario()
            cube = truncate_integration(rebuild_cube(rec), rec.factor)
            counts = np.zeros(cfg.n_range, dtype=int)
            for s in rec.truth():
                counts[s.range_bin] += 1
            maps.append(music_rd_map(cube, grid=cfg.n_pulses, order=counts))
    elif method == "sr3":
        require(checkpoint is not None, "sr3 evaluation needs a checkpoint")
        from .diffusion.training import load_checkpoint
        from .diffusion.process import sample as diffusion_sample
        from .diffusion.unet import TorchDenoiser

        net, sched, _ = load_checkpoint(checkpoint)
        require(sched is not None, "checkpoint lacks its schedule")
        conds, params_list = [], []
        for rec in records:
            norm_map, params = load_rdmap(base_dir / rec.sr_fft_path)
            conds.append(norm_map.values)
            params_list.append(params)
        rng = np.random.default_rng(seed)
        out = diffusion_sample(
            TorchDenoiser(net), np.stack(conds), sched, rng, clip=True, clip_x0=True
        )
        from .spectral import RDMap

        for x_sr, params, rec in zip(out, params_list, records):
            norm_map = RDMap(values=x_sr, domain="normalized", floor_db=params.floor_db)
            maps.append(log_db_to_linear(denormalize(norm_map, params)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return maps


def evaluate_methods(
    manifest_path,
    methods,
    cfar_cfg=None,
    checkpoint=None,
    out_dir=None,
    seed=0,
    tol=DEFAULT_TOL,
    group=True,
):
    """Compare SR methods through CFAR detection against truth.

    Per record and method: build the SR map, run CA-CFAR on the linear map,
    match detections to truth and aggregate recall / precision /
    hallucination rate per (method, factor). Returns (rows, summary); when
    ``out_dir`` is given also writes report.csv and summary.json.
    """
    methods = [m.strip() for m in (methods.split(",") if isinstance(methods, str) else methods)]
    require(methods, "no methods requested")
    records = load_manifest(manifest_path)
    require(records, "empty manifest")
    base_dir = Path(manifest_path).parent
    cfar_cfg = cfar_cfg or cfar_mod.CfarConfig()

    rows = []
    for method in methods:
        sr_maps = _sr_maps_for_method(records, method, base_dir, checkpoint=checkpoint, seed=seed)
        for rec, sr_map in zip(records, sr_maps):
            cfg = rec.scenario()
            dets = cfar_mod.ca_cfar_2d(sr_map, cfar_cfg)
            if group:
                dets = cfar_mod.group_detections(dets, sr_map)
            report = match_detections(dets, rec.truth(), cfg.n_pulses, cfg.vel_res, tol=tol)
            rows.append(
                {
                    "sample": rec.sample_id,
                    "method": method,
                    "factor": rec.factor,
                    "tp": report.tp,
                    "fn": report.fn,
                    "fa": report.false_alarms,
                    "recall": report.recall,
                    "precision": report.precision,
                }
            )

    summary = {}
    for method in methods:
        for factor in sorted({r["factor"] for r in rows}):
            sel = [r for r in rows if r["method"] == method and r["factor"] == factor]
            if not sel:
                continue
            summary[f"{method}_f{factor}"] = {
                "method": method,
                "factor": factor,
                "n_samples": len(sel),
                "recall": float(np.mean([r["recall"] for r in sel])),
                "precision": float(np.mean([r["precision"] for r in sel])),
                "hallucination_rate": float(np.mean([r["fa"] for r in sel])),
            }

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with (out_dir / "report.csv").open("w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["sample", "method", "factor", "tp", "fn", "fa", "recall", "precision"]
            )
            writer.writeheader()
            writer.writerows(rows)
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    return rows, summary
