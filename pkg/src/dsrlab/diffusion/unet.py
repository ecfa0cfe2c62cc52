"""Compact conditional UNet noise predictor.

Input is the noisy map concatenated with its conditioning map (2 channels);
output is the predicted noise. Time conditioning enters every residual
block through a sinusoidal embedding projected per-block. Plain convolution
residual blocks throughout; width grows by ``channel_mults`` at each
downsampling.
"""

import math
from dataclasses import dataclass, asdict

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..validation import require


@dataclass
class DenoiserSpec:
    """Architecture hyperparameters; defaults are the desk-scale profile."""

    kind: str = "trainable_unet"
    base_channels: int = 16
    channel_mults: tuple = (1, 2)
    in_channels: int = 2
    time_dim: int = 16

    def __post_init__(self):
        require(
            self.kind in ("trainable_unet", "oracle_single_point", "oracle_gaussian"),
            f"unknown denoiser kind {self.kind!r}",
        )
        self.channel_mults = tuple(int(m) for m in self.channel_mults)
        require(len(self.channel_mults) >= 1, "channel_mults must be non-empty")
        require(self.in_channels == 2, "conditional operation needs in_channels = 2")

    def to_dict(self):
        d = asdict(self)
        d["channel_mults"] = list(self.channel_mults)
        return d


def full_scale_spec():
    """Reference full-scale architecture (base 64, mults 1/2/3/4)."""
    return DenoiserSpec(base_channels=64, channel_mults=(1, 2, 3, 4), time_dim=64)


class SinusoidalTimeEmbedding(nn.Module):
    def __init__(self, dim):
        super().__init__()
        self.dim = dim
        self.mlp = nn.Sequential(nn.Linear(dim, dim * 4), nn.SiLU(), nn.Linear(dim * 4, dim * 4))

    def forward(self, t):
        half = self.dim // 2
        freqs = torch.exp(
            -math.log(10000.0) * torch.arange(half, dtype=torch.float32, device=t.device) / (half - 1)
        )
        ang = t[:, None].float() * freqs[None]
        return self.mlp(torch.cat([torch.sin(ang), torch.cos(ang)], dim=1))


class ResBlock(nn.Module):
    def __init__(self, c_in, c_out, t_dim):
        super().__init__()
        self.norm1 = nn.GroupNorm(min(8, c_in), c_in)
        self.conv1 = nn.Conv2d(c_in, c_out, 3, padding=1)
        self.time_proj = nn.Linear(t_dim, c_out)
        self.norm2 = nn.GroupNorm(min(8, c_out), c_out)
        self.conv2 = nn.Conv2d(c_out, c_out, 3, padding=1)
        self.skip = nn.Conv2d(c_in, c_out, 1) if c_in != c_out else nn.Identity()

    def forward(self, x, t_emb):
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.time_proj(t_emb)[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return h + self.skip(x)


class ConditionalUNet(nn.Module):
    """UNet over [B, 2, H, W] -> [B, 1, H, W] predicted noise."""

    def __init__(self, spec=None):
        super().__init__()
        self.spec = spec or DenoiserSpec()
        base = self.spec.base_channels
        chans = [base * m for m in self.spec.channel_mults]
        t_dim = self.spec.time_dim * 4
        self.time_embed = SinusoidalTimeEmbedding(self.spec.time_dim)
        self.stem = nn.Conv2d(self.spec.in_channels, base, 3, padding=1)

        self.down_blocks = nn.ModuleList()
        self.downsamplers = nn.ModuleList()
        c_in = base
        for i, c in enumerate(chans):
            self.down_blocks.append(
                nn.ModuleList([ResBlock(c_in, c, t_dim), ResBlock(c, c, t_dim)])
            )
            self.downsamplers.append(
                nn.Conv2d(c, c, 3, stride=2, padding=1) if i < len(chans) - 1 else nn.Identity()
            )
            c_in = c

        self.mid = ResBlock(chans[-1], chans[-1], t_dim)

        self.upsamplers = nn.ModuleList()
        self.up_blocks = nn.ModuleList()
        for i in reversed(range(len(chans) - 1)):
            c_hi, c_lo = chans[i + 1], chans[i]
            self.upsamplers.append(nn.ConvTranspose2d(c_hi, c_hi, 4, stride=2, padding=1))
            self.up_blocks.append(
                nn.ModuleList([ResBlock(c_hi + c_lo, c_lo, t_dim), ResBlock(c_lo, c_lo, t_dim)])
            )

        self.out_norm = nn.GroupNorm(min(8, chans[0]), chans[0])
        self.out_conv = nn.Conv2d(chans[0], 1, 3, padding=1)

    def forward(self, x, t):
        t_emb = self.time_embed(t)
        h = self.stem(x)
        skips = []
        n_stages = len(self.down_blocks)
        for i, (blocks, down) in enumerate(zip(self.down_blocks, self.downsamplers)):
            for block in blocks:
                h = block(h, t_emb)
            if i < n_stages - 1:
                skips.append(h)
                h = down(h)
        h = self.mid(h, t_emb)
        for up, blocks in zip(self.upsamplers, self.up_blocks):
            h = up(h)
            h = torch.cat([h, skips.pop()], dim=1)
            for block in blocks:
                h = block(h, t_emb)
        return self.out_conv(F.silu(self.out_norm(h)))


class TorchDenoiser:
    """Adapts a ConditionalUNet to the numpy (x_t, y, t) -> eps_hat protocol.

    Accepts a single [H, W] map or a stacked [B, H, W] batch so the sampler
    can refine many conditioning maps in one pass.
    """

    def __init__(self, net):
        self.net = net

    def __call__(self, x_t, y, t):
        import numpy as np

        x_t = np.asarray(x_t)
        single = x_t.ndim == 2
        self.net.eval()
        with torch.no_grad():
            xb = torch.tensor(x_t, dtype=torch.float32)
            yb = torch.tensor(np.asarray(y), dtype=torch.float32)
            if single:
                xb, yb = xb[None], yb[None]
            xb, yb = xb[:, None], yb[:, None]
            tb = torch.full((xb.shape[0],), int(t), dtype=torch.long)
            out = self.net(torch.cat([xb, yb], dim=1), tb)[:, 0]
        out = out.numpy().astype(np.float64)
        return out[0] if single else out
