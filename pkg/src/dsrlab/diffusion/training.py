"""Denoiser training loop, loss logging and the checkpoint container.

Checkpoints are a single self-describing file: an 8-byte magic, a uint64
little-endian header length, a JSON header (architecture spec, schedule,
training metadata and a parameter manifest) and the concatenated raw
little-endian float32 parameter blobs in manifest order.
"""

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..validation import require
from .schedule import make_schedule, DESK_T, DESK_BETA_1, DESK_BETA_T
from .unet import ConditionalUNet, DenoiserSpec

CKPT_MAGIC = b"DSRLCKPT"


@dataclass
class TrainingConfig:
    """Optimization hyperparameters; defaults are the desk profile.

    The learning rate is held at ``lr`` for the first ``lr_hold`` fraction of
    training, then decays linearly to ``lr_floor * lr``.
    """

    epochs: int = 100
    batch_size: int = 32
    lr: float = 2e-4
    lr_hold: float = 0.6
    lr_floor: float = 0.1
    T: int = DESK_T
    beta_1: float = DESK_BETA_1
    beta_T: float = DESK_BETA_T

    def __post_init__(self):
        require(self.epochs >= 1, "epochs must be >= 1")
        require(self.batch_size >= 1, "batch_size must be >= 1")
        require(self.lr > 0, "lr must be > 0")
        require(0.0 <= self.lr_hold <= 1.0, "lr_hold must be in [0, 1]")
        require(0.0 < self.lr_floor <= 1.0, "lr_floor must be in (0, 1]")

    def schedule(self):
        return make_schedule(self.T, self.beta_1, self.beta_T)

    def lr_at(self, step, total_steps):
        hold = self.lr_hold * total_steps
        if total_steps <= hold or step <= hold:
            return self.lr
        frac = (step - hold) / (total_steps - hold)
        return self.lr * (1.0 - (1.0 - self.lr_floor) * frac)


@dataclass
class TrainResult:
    checkpoint_path: Path
    loss_csv_path: Path
    losses: list


def train_denoiser(x0, y, spec=None, hyper=None, seed=0, out_dir="."):
    """Fit the conditional noise predictor on paired normalized maps.

    ``x0`` and ``y`` are [n, H, W] arrays of targets and conditioning maps.
    Writes ``denoiser.ckpt`` and ``loss.csv`` under out_dir and returns a
    TrainResult. Deterministic given the seed (single-threaded CPU).
    """
    spec = spec or DenoiserSpec()
    hyper = hyper or TrainingConfig()
    require(spec.kind == "trainable_unet", "train_denoiser needs a trainable_unet spec")
    x0 = np.asarray(x0, dtype=np.float32)
    y = np.asarray(y, dtype=np.float32)
    require(x0.ndim == 3 and x0.shape == y.shape, "x0/y must be matching [n, H, W] stacks")
    require(x0.shape[0] >= 1, "empty dataset")

    sched = hyper.schedule()
    torch.manual_seed(seed)
    net = ConditionalUNet(spec)
    opt = torch.optim.Adam(net.parameters(), lr=hyper.lr)
    rng = np.random.default_rng(seed)

    sqrt_ab = torch.tensor(sched.sqrt_alpha_bar, dtype=torch.float32)
    sqrt_1mab = torch.tensor(sched.sqrt_one_minus_alpha_bar, dtype=torch.float32)
    x0_t = torch.tensor(x0)[:, None]
    y_t = torch.tensor(y)[:, None]

    n = x0.shape[0]
    steps_per_epoch = (n + hyper.batch_size - 1) // hyper.batch_size
    total_steps = steps_per_epoch * hyper.epochs
    losses = []
    step = 0
    net.train()
    for _ in range(hyper.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, hyper.batch_size):
            idx = order[lo : lo + hyper.batch_size]
            xb, yb = x0_t[idx], y_t[idx]
            t = torch.tensor(rng.integers(0, sched.T, size=len(idx)), dtype=torch.long)
            eps = torch.randn(xb.shape)
            x_t = sqrt_ab[t][:, None, None, None] * xb + sqrt_1mab[t][:, None, None, None] * eps
            pred = net(torch.cat([x_t, yb], dim=1), t)
            loss = ((pred - eps) ** 2).mean()
            for group in opt.param_groups:
                group["lr"] = hyper.lr_at(step, total_steps)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append((step, float(loss.item())))
            step += 1

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "denoiser.ckpt"
    save_checkpoint(ckpt_path, net, hyper, extra={"seed": seed, "n_train": n})
    csv_path = out_dir / "loss.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss"])
        writer.writerows(losses)
    return TrainResult(checkpoint_path=ckpt_path, loss_csv_path=csv_path, losses=losses)


def train_from_manifest(manifest_path, spec=None, hyper=None, seed=0, out_dir="."):
    """train_denoiser on the (HR, SR-FFT) normalized pairs of a dataset manifest."""
    from ..pipeline import load_manifest
    from ..spectral import load_rdmap

    records = load_manifest(manifest_path)
    require(records, "empty dataset manifest")
    base = Path(manifest_path).parent
    x0 = np.stack([load_rdmap(base / r.hr_path)[0].values for r in records])
    y = np.stack([load_rdmap(base / r.sr_fft_path)[0].values for r in records])
    return train_denoiser(x0, y, spec=spec, hyper=hyper, seed=seed, out_dir=out_dir)


def save_checkpoint(path, net, hyper=None, extra=None):
    """Serialize net weights into the container format described above."""
    state = net.state_dict()
    manifest = []
    blobs = []
    offset = 0
    for name, tensor in state.items():
        arr = tensor.detach().cpu().numpy().astype("<f4")
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blob = arr.tobytes(order="C")
        blobs.append(blob)
        offset += len(blob)
    header = {
        "format": "dsrlab-checkpoint-v1",
        "spec": net.spec.to_dict(),
        "schedule": None
        if hyper is None
        else {"T": hyper.T, "beta_1": hyper.beta_1, "beta_T": hyper.beta_T},
        "train": None
        if hyper is None
        else {"epochs": hyper.epochs, "batch_size": hyper.batch_size, "lr": hyper.lr},
        "extra": extra or {},
        "params": manifest,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for blob in blobs:
            fh.write(blob)
    return Path(path)


def load_checkpoint(path):
    """Rebuild the network (and its schedule, if recorded) from a checkpoint.

    Returns (net, schedule_or_None, header_dict).
    """
    raw = Path(path).read_bytes()
    require(raw[:8] == CKPT_MAGIC, f"{path} is not a dsrlab checkpoint")
    (header_len,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16 : 16 + header_len].decode("utf-8"))
    body = raw[16 + header_len :]
    spec_dict = dict(header["spec"])
    spec_dict["channel_mults"] = tuple(spec_dict["channel_mults"])
    spec = DenoiserSpec(**spec_dict)
    net = ConditionalUNet(spec)
    state = {}
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        numel = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(body, dtype="<f4", count=numel, offset=start).reshape(shape)
        state[entry["name"]] = torch.tensor(arr.copy(), dtype=torch.float32)
    net.load_state_dict(state)
    net.eval()
    sched = None
    if header.get("schedule"):
        s = header["schedule"]
        sched = make_schedule(s["T"], s["beta_1"], s["beta_T"])
    return net, sched, header
