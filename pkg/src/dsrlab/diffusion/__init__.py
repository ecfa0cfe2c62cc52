"""Conditional denoising diffusion machinery (schedule, process, denoisers)."""

from .schedule import DiffusionSchedule, make_schedule, full_schedule, desk_schedule
from .process import forward_sample, training_loss, reverse_step, sample
from .denoisers import SinglePointOracle, GaussianOracle, ZeroDenoiser, MapBatch

__all__ = [
    "DiffusionSchedule",
    "make_schedule",
    "full_schedule",
    "desk_schedule",
    "forward_sample",
    "training_loss",
    "reverse_step",
    "sample",
    "SinglePointOracle",
    "GaussianOracle",
    "ZeroDenoiser",
    "MapBatch",
]
