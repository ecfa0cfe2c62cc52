"""Scikit-learn style estimator fronts for the three SR methods and CFAR.

Thin wrappers over the functional cores so the lab composes with pipeline
tooling that expects fit/transform/predict and get_params. Inputs are
SlowTimeCube / RDMap domain objects (single or list); outputs mirror the
input arity.
"""

import numpy as np
from sklearn.base import BaseEstimator

from . import cfar as cfar_mod
from .music import music_rd_map
from .scenario import SlowTimeCube
from .spectral import RDMap, rd_map_from_cube, to_log_normalized, denormalize, log_db_to_linear
from .validation import require


def _as_list(x, kind):
    single = isinstance(x, kind)
    return ([x] if single else list(x)), single


def _unwrap(items, single):
    return items[0] if single else items


class FftSuperResolver(BaseEstimator):
    """Zero-padded FFT Doppler super-resolution (stateless transform)."""

    def __init__(self, pad_to=128, window=True, element=0):
        self.pad_to = pad_to
        self.window = window
        self.element = element

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        cubes, single = _as_list(X, SlowTimeCube)
        maps = [
            rd_map_from_cube(c, pad_to=self.pad_to, window=self.window, element=self.element)
            for c in cubes
        ]
        return _unwrap(maps, single)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)


class MusicSuperResolver(BaseEstimator):
    """MUSIC pseudospectrum maps on the FFT baseline's Doppler grid."""

    def __init__(self, grid=128, order=2, element=0, smoothing_len=None):
        self.grid = grid
        self.order = order
        self.element = element
        self.smoothing_len = smoothing_len

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        cubes, single = _as_list(X, SlowTimeCube)
        maps = [
            music_rd_map(
                c,
                grid=self.grid,
                order=self.order,
                element=self.element,
                smoothing_len=self.smoothing_len,
            )
            for c in cubes
        ]
        return _unwrap(maps, single)

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)


class LogNormalizer(BaseEstimator):
    """Per-map log normalization onto [-1, 1] with remembered NormParams.

    transform() records one NormParams per map (data-dependent, per sample,
    like a per-image scaler); inverse_transform() replays them to recover the
    clipped absolute-dB maps.
    """

    def __init__(self, floor_db=-60.0):
        self.floor_db = floor_db

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        maps, single = _as_list(X, RDMap)
        out, params = [], []
        for m in maps:
            nm, p = to_log_normalized(m, floor_db=self.floor_db)
            out.append(nm)
            params.append(p)
        self.params_ = _unwrap(params, single)
        return _unwrap(out, single)

    def inverse_transform(self, X, params=None):
        maps, single = _as_list(X, RDMap)
        if params is None:
            params = getattr(self, "params_", None)
            require(params is not None, "no NormParams: transform first or pass params")
        plist = [params] if not isinstance(params, list) else params
        require(len(plist) == len(maps), "params / maps count mismatch")
        out = [denormalize(m, p) for m, p in zip(maps, plist)]
        return _unwrap(out, single)


class DiffusionSuperResolver(BaseEstimator):
    """Conditional diffusion refiner behind fit/transform.

    fit(x0, y) trains the desk-profile denoiser on paired normalized map
    stacks; transform(y) refines conditioning maps into SR maps. A trained
    instance can also be created from a checkpoint file.
    """

    def __init__(self, spec=None, hyper=None, seed=0, out_dir=".", clip_x0=True):
        self.spec = spec
        self.hyper = hyper
        self.seed = seed
        self.out_dir = out_dir
        self.clip_x0 = clip_x0

    def fit(self, X, y):
        """X: [n, H, W] target maps; y: matching conditioning maps."""
        from .diffusion.training import train_denoiser

        result = train_denoiser(
            X, y, spec=self.spec, hyper=self.hyper, seed=self.seed, out_dir=self.out_dir
        )
        self.checkpoint_path_ = result.checkpoint_path
        self.losses_ = result.losses
        self._load(result.checkpoint_path)
        return self

    @classmethod
    def from_checkpoint(cls, path, seed=0, clip_x0=True):
        est = cls(seed=seed, clip_x0=clip_x0)
        est._load(path)
        est.checkpoint_path_ = path
        return est

    def _load(self, path):
        from .diffusion.training import load_checkpoint
        from .diffusion.unet import TorchDenoiser

        net, sched, header = load_checkpoint(path)
        require(sched is not None, "checkpoint lacks its schedule")
        self.denoiser_ = TorchDenoiser(net)
        self.schedule_ = sched
        self.header_ = header

    def transform(self, y):
        """Refine conditioning maps (ndarray [H,W] or [n,H,W], or RDMap(s))."""
        from .diffusion.process import sample as diffusion_sample

        require(hasattr(self, "denoiser_"), "not fitted: call fit() or from_checkpoint()")
        if isinstance(y, RDMap):
            y = y.values
        elif isinstance(y, (list, tuple)) and y and isinstance(y[0], RDMap):
            y = np.stack([m.values for m in y])
        rng = np.random.default_rng(self.seed)
        return diffusion_sample(
            self.denoiser_, np.asarray(y, dtype=np.float64), self.schedule_, rng,
            clip=True, clip_x0=self.clip_x0,
        )


class CaCfarDetector(BaseEstimator):
    """CA-CFAR detector with predict() returning DetectionList(s)."""

    def __init__(self, guard=2, train=4, pfa=1e-3, boundary="clip", group=True):
        self.guard = guard
        self.train = train
        self.pfa = pfa
        self.boundary = boundary
        self.group = group

    def _config(self):
        return cfar_mod.CfarConfig(
            guard=self.guard, train=self.train, pfa=self.pfa, boundary=self.boundary
        )

    def fit(self, X=None, y=None):
        return self

    def predict(self, X):
        maps, single = _as_list(X, RDMap)
        out = []
        for m in maps:
            if m.domain == "log_db":
                m = log_db_to_linear(m)
            dets = cfar_mod.ca_cfar_2d(m, self._config())
            if self.group:
                dets = cfar_mod.group_detections(dets, m)
            out.append(dets)
        return _unwrap(out, single)
