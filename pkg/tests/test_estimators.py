import numpy as np
import pytest
from sklearn.base import clone

from dsrlab.estimators import (
    FftSuperResolver,
    MusicSuperResolver,
    LogNormalizer,
    DiffusionSuperResolver,
    CaCfarDetector,
)
from dsrlab.cfar import CfarConfig, ca_cfar_2d, group_detections
from dsrlab.music import music_rd_map
from dsrlab.scenario import simulate_datacube
from dsrlab.spectral import RDMap, rd_map_from_cube, to_log_normalized


@pytest.fixture(scope="module")
def cube(desk_cfg):
    c, _ = simulate_datacube(desk_cfg)
    return c


class TestSklearnProtocol:
    @pytest.mark.parametrize(
        "est",
        [
            FftSuperResolver(pad_to=64, window=False),
            MusicSuperResolver(grid=64, order=3),
            LogNormalizer(floor_db=-40.0),
            CaCfarDetector(pfa=1e-4),
            DiffusionSuperResolver(seed=3),
        ],
    )
    def test_get_set_params_and_clone(self, est):
        params = est.get_params()
        twin = clone(est)
        assert twin.get_params() == params
        est.set_params(**params)

    def test_fit_returns_self(self, cube):
        est = FftSuperResolver(pad_to=32)
        assert est.fit() is est


class TestFftSuperResolver:
    def test_matches_functional_core(self, cube):
        est = FftSuperResolver(pad_to=64, window=True)
        m = est.transform(cube)
        ref = rd_map_from_cube(cube, pad_to=64, window=True)
        assert np.array_equal(m.values, ref.values)

    def test_list_in_list_out(self, cube):
        maps = FftSuperResolver(pad_to=32).transform([cube, cube])
        assert isinstance(maps, list) and len(maps) == 2


class TestMusicSuperResolver:
    def test_matches_functional_core(self, cube):
        est = MusicSuperResolver(grid=32, order=2)
        m = est.transform(cube)
        ref = music_rd_map(cube, grid=32, order=2)
        assert np.array_equal(m.values, ref.values)


class TestLogNormalizer:
    def test_round_trip(self, cube):
        linear = rd_map_from_cube(cube, pad_to=32)
        est = LogNormalizer()
        norm = est.transform(linear)
        ref, params = to_log_normalized(linear)
        assert np.array_equal(norm.values, ref.values)
        back = est.inverse_transform(norm)
        assert back.domain == "log_db"
        assert np.max(back.values) == pytest.approx(params.peak_db)


class TestCaCfarDetector:
    def test_matches_functional_core(self):
        rng = np.random.default_rng(0)
        values = rng.exponential(1.0, (32, 32))
        values[10, 20] = 500.0
        m = RDMap(values=values)
        est = CaCfarDetector(pfa=1e-3, group=True)
        dets = est.predict(m)
        ref = group_detections(ca_cfar_2d(m, CfarConfig(pfa=1e-3)), m)
        assert dets.indices() == ref.indices()
        assert (10, 20) in dets.indices()

    def test_log_db_input_converted(self):
        values = np.zeros((32, 32))
        values[5, 5] = 20.0  # +20 dB spike
        m = RDMap(values=values, domain="log_db", floor_db=-60.0)
        dets = CaCfarDetector().predict(m)
        assert (5, 5) in dets.indices()


class TestDiffusionSuperResolver:
    def test_from_checkpoint_transform(self, tiny_checkpoint):
        est = DiffusionSuperResolver.from_checkpoint(tiny_checkpoint, seed=11)
        y = np.zeros((2, 32, 32))
        out = est.transform(y)
        assert out.shape == (2, 32, 32)
        assert np.all(out >= -1) and np.all(out <= 1)

    def test_transform_deterministic_per_seed(self, tiny_checkpoint):
        y = np.zeros((1, 32, 32))
        a = DiffusionSuperResolver.from_checkpoint(tiny_checkpoint, seed=4).transform(y)
        b = DiffusionSuperResolver.from_checkpoint(tiny_checkpoint, seed=4).transform(y)
        c = DiffusionSuperResolver.from_checkpoint(tiny_checkpoint, seed=5).transform(y)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_rdmap_input_accepted(self, tiny_checkpoint):
        est = DiffusionSuperResolver.from_checkpoint(tiny_checkpoint, seed=1)
        m = RDMap(values=np.zeros((32, 32)), domain="normalized", floor_db=-60.0)
        out = est.transform(m)
        assert out.shape == (32, 32)

    def test_unfitted_transform_rejected(self):
        with pytest.raises(ValueError, match="fit"):
            DiffusionSuperResolver().transform(np.zeros((1, 32, 32)))

    def test_fit_trains_and_transforms(self, tmp_path):
        from dsrlab.diffusion.training import TrainingConfig

        rng = np.random.default_rng(1)
        x0 = np.clip(rng.standard_normal((4, 32, 32)) * 0.2, -1, 1)
        y = np.clip(rng.standard_normal((4, 32, 32)) * 0.2, -1, 1)
        est = DiffusionSuperResolver(
            hyper=TrainingConfig(epochs=1, batch_size=2, T=8), seed=0, out_dir=tmp_path
        )
        est.fit(x0, y)
        assert est.checkpoint_path_.exists()
        out = est.transform(y[:1])
        assert out.shape == (1, 32, 32)
