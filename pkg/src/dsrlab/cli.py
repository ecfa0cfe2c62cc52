"""Command-line entry point wiring simulation, datasets, training and reports.

Every subcommand takes --out (default from DSRLAB_OUT, else ./out), honors
--seed, writes all artifacts under the output directory and finishes by
dropping a run_manifest.json recording the resolved config hash, the seed
and every produced file.
"""

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import pipeline
from .cfar import CfarConfig, ca_cfar_2d, group_detections
from .render import render_heatmap, render_panels, map_to_rgb, write_png
from .scenario import ScenarioConfig, simulate_datacube
from .spectral import rd_map_from_cube, to_log_normalized, save_rdmap, load_rdmap, log_db_to_linear, denormalize
from .validation import require

FACTORS = (1, 2, 4, 8)


class ConfigError(ValueError):
    """Bad config file, unknown key or malformed override (exit code 2)."""


def _parse_overrides(pairs):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not key=value")
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _load_config(path, overrides, known_keys, defaults=None):
    data = dict(defaults or {})
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        data.update(loaded)
    data.update(_parse_overrides(overrides))
    unknown = set(data) - set(known_keys)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _out_dir(args):
    root = args.out or os.environ.get("DSRLAB_OUT") or "out"
    out = Path(root)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run_manifest(out_dir, subcommand, config, seed, files):
    payload = json.dumps(config, sort_keys=True, default=str).encode()
    manifest = {
        "subcommand": subcommand,
        "config_hash": hashlib.sha256(payload).hexdigest(),
        "seed": seed,
        "files": sorted(str(Path(f).relative_to(out_dir)) for f in files),
    }
    path = out_dir / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


def _build_config(cls, data):
    try:
        return cls(**data)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _scenario_from_args(args):
    data = _load_config(args.config, args.overrides, ScenarioConfig.__dataclass_fields__)
    if args.seed is not None:
        data["seed"] = args.seed
    return _build_config(ScenarioConfig, data)


def paired_targets_sampler(separation_bins=2, amplitudes=(1.0, 0.5), margin=6):
    """Scene sampler pinning two targets in one range bin, a fixed number of
    Doppler bins apart, with on-grid velocities. Used by the resolution
    stress scenario; strong/weak side is randomized."""
    from .scenario import Scatterer

    def sampler(cfg):
        rng = np.random.default_rng([cfg.seed, 71])
        rbin = int(rng.integers(margin, cfg.n_range - margin))
        d1 = int(rng.integers(margin, cfg.n_pulses - margin - separation_bins))
        amps = list(amplitudes) if rng.random() < 0.5 else list(amplitudes)[::-1]
        scatterers = []
        for k, amp in enumerate(amps):
            d = d1 + k * separation_bins
            v = (d - cfg.n_pulses / 2.0) * cfg.vel_res
            scatterers.append(
                Scatterer(
                    range_bin=rbin,
                    velocity=v,
                    amplitude=amp,
                    phase=float(rng.uniform(0.0, 2.0 * np.pi)),
                    kind="target",
                )
            )
        return scatterers

    return sampler


def cmd_simulate(args):
    out = _out_dir(args)
    cfg = _scenario_from_args(args)
    cube, truth = simulate_datacube(cfg)
    hr = rd_map_from_cube(cube, pad_to=cfg.n_pulses, window=args.window == "on")
    norm, params = to_log_normalized(hr)
    files = [save_rdmap(out / "hr.f32", norm, params), out / "hr.f32.json"]
    truth_path = out / "truth.json"
    truth_path.write_text(json.dumps([asdict(s) for s in truth], indent=2))
    files.append(truth_path)
    files.append(render_heatmap(norm, out / "hr.ppm", db_span=args.db_span))
    _write_run_manifest(out, "simulate", asdict(cfg), cfg.seed, files)
    print(f"wrote HR map and truth for {len(truth)} scatterers to {out}")
    return 0


def cmd_make_dataset(args):
    out = _out_dir(args)
    cfg = _scenario_from_args(args)
    factors = [int(f) for f in str(args.factor).split(",")]
    sampler = None
    if args.doppler_pair is not None:
        sampler = paired_targets_sampler(separation_bins=args.doppler_pair)
    manifest = pipeline.generate_dataset(
        cfg,
        n_samples=args.samples,
        factors=factors,
        out_dir=out,
        seed=cfg.seed,
        window=args.window == "on",
        scatterer_sampler=sampler,
    )
    files = sorted(out.glob("*.f32")) + sorted(out.glob("*.f32.json")) + [manifest]
    _write_run_manifest(out, "make-dataset", asdict(cfg), cfg.seed, files)
    print(f"wrote {manifest}")
    return 0


TRAIN_KEYS = {
    "epochs", "batch_size", "lr", "lr_hold", "lr_floor", "T", "beta_1", "beta_T",
    "base_channels", "channel_mults", "time_dim",
}


def cmd_train(args):
    from .diffusion.training import TrainingConfig, train_from_manifest
    from .diffusion.unet import DenoiserSpec

    out = _out_dir(args)
    data = _load_config(args.config, args.overrides, TRAIN_KEYS)
    spec_kwargs = {k: data.pop(k) for k in ("base_channels", "channel_mults", "time_dim") if k in data}
    if "channel_mults" in spec_kwargs:
        spec_kwargs["channel_mults"] = tuple(spec_kwargs["channel_mults"])
    spec = _build_config(DenoiserSpec, spec_kwargs)
    hyper = _build_config(TrainingConfig, data)
    seed = args.seed if args.seed is not None else 0
    result = train_from_manifest(args.manifest, spec=spec, hyper=hyper, seed=seed, out_dir=out)
    files = [result.checkpoint_path, result.loss_csv_path]
    _write_run_manifest(out, "train", {"spec": spec.to_dict(), "hyper": asdict(hyper)}, seed, files)
    print(f"wrote {result.checkpoint_path} (final loss {result.losses[-1][1]:.4f})")
    return 0


def cmd_sample(args):
    from .estimators import DiffusionSuperResolver
    from .spectral import RDMap

    out = _out_dir(args)
    seed = args.seed if args.seed is not None else 0
    est = DiffusionSuperResolver.from_checkpoint(args.checkpoint, seed=seed)
    records = pipeline.load_manifest(args.manifest)
    if args.samples is not None:
        records = records[: args.samples]
    require(records, "no records to sample")
    base = Path(args.manifest).parent
    conds, params = [], []
    for rec in records:
        m, p = load_rdmap(base / rec.sr_fft_path)
        conds.append(m.values)
        params.append(p)
    refined = est.transform(np.stack(conds))
    files = []
    for rec, values, p in zip(records, refined, params):
        m = RDMap(values=values, domain="normalized", floor_db=p.floor_db)
        path = out / f"s{rec.sample_id:05d}_f{rec.factor}_sr3.f32"
        files += [save_rdmap(path, m, p), Path(str(path) + ".json")]
    _write_run_manifest(out, "sample", {"checkpoint": str(args.checkpoint)}, seed, files)
    print(f"wrote {len(refined)} SR3 maps to {out}")
    return 0


def cmd_music(args):
    from .music import music_rd_map
    from .scenario import truncate_integration

    out = _out_dir(args)
    records = pipeline.load_manifest(args.manifest)
    if args.samples is not None:
        records = records[: args.samples]
    require(records, "no records")
    files = []
    for rec in records:
        cfg = rec.scenario()
        cube = truncate_integration(pipeline.rebuild_cube(rec), rec.factor)
        counts = np.zeros(cfg.n_range, dtype=int)
        for s in rec.truth():
            counts[s.range_bin] += 1
        m = music_rd_map(cube, grid=cfg.n_pulses, order=counts)
        norm, params = to_log_normalized(m)
        path = out / f"s{rec.sample_id:05d}_f{rec.factor}_music.f32"
        files += [save_rdmap(path, norm, params), Path(str(path) + ".json")]
    _write_run_manifest(out, "music", {"manifest": str(args.manifest)}, args.seed or 0, files)
    print(f"wrote {len(records)} MUSIC maps to {out}")
    return 0


def cmd_cfar(args):
    out = _out_dir(args)
    data = _load_config(args.config, args.overrides, CfarConfig.__dataclass_fields__)
    cfg = _build_config(CfarConfig, data)
    rd_map, params = load_rdmap(args.map)
    if rd_map.domain == "normalized":
        require(params is not None, "normalized map lacks NormParams sidecar")
        rd_map = log_db_to_linear(denormalize(rd_map, params))
    elif rd_map.domain == "log_db":
        rd_map = log_db_to_linear(rd_map)
    dets = ca_cfar_2d(rd_map, cfg)
    if args.group == "on":
        dets = group_detections(dets, rd_map)
    path = out / (Path(args.map).stem + "_detections.json")
    path.write_text(json.dumps(dets.to_json_rows(), indent=2))
    _write_run_manifest(out, "cfar", asdict(cfg), args.seed or 0, [path])
    print(f"{len(dets)} detections -> {path}")
    return 0


def cmd_evaluate(args):
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else 0
    cfar_data = _load_config(args.config, args.overrides, CfarConfig.__dataclass_fields__)
    cfar_cfg = _build_config(CfarConfig, cfar_data)
    rows, summary = pipeline.evaluate_methods(
        args.manifest,
        methods=args.methods,
        cfar_cfg=cfar_cfg,
        checkpoint=args.checkpoint,
        out_dir=out,
        seed=seed,
    )
    files = [out / "report.csv", out / "summary.json"]
    _write_run_manifest(
        out, "evaluate", {"methods": args.methods, "cfar": asdict(cfar_cfg)}, seed, files
    )
    for key, agg in summary.items():
        print(
            f"{key}: recall {agg['recall']:.3f} precision {agg['precision']:.3f} "
            f"hallucination_rate {agg['hallucination_rate']:.2f}"
        )
    return 0


def cmd_render(args):
    out = _out_dir(args)
    maps = []
    for path in args.maps:
        m, _ = load_rdmap(path)
        maps.append(m)
    require(maps, "no maps to render")
    files = []
    if len(maps) == 1:
        target = out / (Path(args.maps[0]).stem + ".ppm")
        files.append(render_heatmap(maps[0], target, db_span=args.db_span, axes=args.axes == "on"))
    else:
        target = out / "panels.ppm"
        files.append(render_panels(maps, target, db_span=args.db_span))
    if args.png:
        rgb = map_to_rgb(maps[0], db_span=args.db_span)
        files.append(write_png(out / (Path(args.maps[0]).stem + ".png"), rgb))
    _write_run_manifest(out, "render", {"db_span": args.db_span}, args.seed or 0, files)
    print(f"wrote {target}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dsrlab",
        description="Desk-scale Doppler super-resolution lab: simulate, degrade, "
        "super-resolve (FFT / MUSIC / diffusion) and score with CA-CFAR.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, overrides=True):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", default=None, help="output directory (default $DSRLAB_OUT or ./out)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--db-span", dest="db_span", type=float, default=60.0)
        if overrides:
            p.add_argument("overrides", nargs="*", help="config overrides as key=value")

    p = sub.add_parser("simulate", help="simulate one scene and write its HR map")
    common(p)
    p.add_argument("--window", choices=("on", "off"), default="on")

    p = sub.add_parser("make-dataset", help="generate paired HR/LR/SR-FFT maps")
    common(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--factor", default="2", help="truncation factor(s), e.g. 2 or 2,4,8")
    p.add_argument("--window", choices=("on", "off"), default="on")
    p.add_argument(
        "--doppler-pair",
        dest="doppler_pair",
        type=int,
        default=None,
        help="pin scenes to two targets this many Doppler bins apart",
    )

    p = sub.add_parser("train", help="train the diffusion denoiser on a dataset")
    common(p)
    p.add_argument("--manifest", required=True)

    p = sub.add_parser("sample", help="refine SR-FFT maps with a trained checkpoint")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("music", help="MUSIC maps for dataset records")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("cfar", help="CFAR detections for one stored map")
    common(p)
    p.add_argument("--map", required=True, help="raw .f32 map path (with sidecar)")
    p.add_argument("--group", choices=("on", "off"), default="on")

    p = sub.add_parser("evaluate", help="compare methods through CFAR vs truth")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--methods", default="fft", help="comma list from fft,music,sr3")
    p.add_argument("--checkpoint", default=None)

    p = sub.add_parser("render", help="render stored maps to P6 heatmaps")
    common(p, overrides=False)
    p.add_argument("maps", nargs="+", help="raw .f32 map paths, panel order preserved")
    p.add_argument("--axes", choices=("on", "off"), default="off")
    p.add_argument("--png", action="store_true", help="also write PNG (needs Pillow)")

    return parser


HANDLERS = {
    "simulate": cmd_simulate,
    "make-dataset": cmd_make_dataset,
    "train": cmd_train,
    "sample": cmd_sample,
    "music": cmd_music,
    "cfar": cmd_cfar,
    "evaluate": cmd_evaluate,
    "render": cmd_render,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return HANDLERS[args.subcommand](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
