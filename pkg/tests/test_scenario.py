import json
import math

import numpy as np
import pytest

from dsrlab.scenario import (
    ScenarioConfig,
    Scatterer,
    simulate_datacube,
    cube_from_scatterers,
    truncate_integration,
    velocity_to_doppler_bin,
    doppler_bin_to_velocity,
)


def desk_cfg(**kw):
    base = dict(n_pulses=32, n_range=32, max_range=24.0, n_targets=2, n_clutter=1, seed=3)
    base.update(kw)
    return ScenarioConfig(**base)


class TestScenarioConfig:
    def test_defaults_satisfy_grid_invariant(self):
        cfg = ScenarioConfig()
        assert cfg.n_range * cfg.range_res == cfg.max_range
        assert cfg.velocity_span == pytest.approx(128 * 0.23)

    def test_pri_from_default_grid(self):
        # PRI = lambda / (2 N dv) with the default wavelength
        cfg = ScenarioConfig()
        assert cfg.pri == pytest.approx(0.03 / (2 * 128 * 0.23))
        assert cfg.pri == pytest.approx(5.095e-4, rel=1e-3)

    def test_grid_invariant_violation_rejected(self):
        with pytest.raises(ValueError, match="max_range"):
            ScenarioConfig(n_range=100, range_res=0.75, max_range=96.0)

    def test_bad_counts_rejected(self):
        with pytest.raises(ValueError):
            ScenarioConfig(n_pulses=0)
        with pytest.raises(ValueError):
            ScenarioConfig(n_targets=-1)
        with pytest.raises(ValueError):
            ScenarioConfig(range_res=0.0, max_range=0.0)

    def test_json_round_trip(self):
        cfg = desk_cfg(snr_db=None)
        again = ScenarioConfig.from_json(cfg.to_json())
        assert again == cfg

    def test_unknown_json_field_rejected(self):
        payload = json.loads(ScenarioConfig().to_json())
        payload["bogus"] = 1
        with pytest.raises(ValueError, match="unknown"):
            ScenarioConfig.from_json(json.dumps(payload))


class TestSimulate:
    def test_zero_doppler_target_constant_slow_time(self):
        cfg = desk_cfg(n_targets=1, n_clutter=0, snr_db=None)
        s = Scatterer(range_bin=5, velocity=0.0, amplitude=1.3, phase=0.7)
        cube, _ = simulate_datacube(cfg, scatterers=[s])
        col = cube.data[:, 5, 0]
        assert np.allclose(col, col[0])
        assert np.allclose(np.abs(col), 1.3)

    def test_single_scatterer_energy(self):
        cfg = desk_cfg(snr_db=None)
        s = Scatterer(range_bin=2, velocity=1.0, amplitude=0.8, phase=0.1)
        cube, _ = simulate_datacube(cfg, scatterers=[s])
        energy = float(np.sum(np.abs(cube.data) ** 2))
        assert energy == pytest.approx(cfg.n_pulses * cfg.n_elements * 0.8**2, rel=1e-12)

    def test_superposition_is_linear(self):
        cfg = desk_cfg(snr_db=None)
        a = Scatterer(range_bin=3, velocity=0.7, amplitude=1.0, phase=0.2)
        b = Scatterer(range_bin=3, velocity=-1.1, amplitude=0.5, phase=4.0)
        ca = cube_from_scatterers(cfg, [a])
        cb = cube_from_scatterers(cfg, [b])
        cab = cube_from_scatterers(cfg, [a, b])
        assert np.allclose(cab.data, ca.data + cb.data)

    def test_seeded_determinism(self):
        cfg = desk_cfg(seed=123)
        c1, t1 = simulate_datacube(cfg)
        c2, t2 = simulate_datacube(cfg)
        assert np.array_equal(c1.data, c2.data)
        assert t1 == t2

    def test_distinct_seeds_differ(self):
        c1, _ = simulate_datacube(desk_cfg(seed=1))
        c2, _ = simulate_datacube(desk_cfg(seed=2))
        assert not np.array_equal(c1.data, c2.data)

    def test_noise_level_tracks_weakest_target(self):
        cfg = desk_cfg(n_targets=0, n_clutter=0, n_range=128, max_range=96.0, snr_db=10.0, seed=9)
        weak = Scatterer(range_bin=0, velocity=0.5, amplitude=0.4, phase=0.0)
        strong = Scatterer(range_bin=1, velocity=0.5, amplitude=4.0, phase=0.0)
        cube, _ = simulate_datacube(cfg, scatterers=[weak, strong])
        # estimate per-cell noise power from scatterer-free cells
        noise_cells = cube.data[:, 2:, :]
        est = float(np.mean(np.abs(noise_cells) ** 2))
        assert est == pytest.approx(0.4**2 / 10.0, rel=0.05)

    def test_empty_scene_rejected(self):
        cfg = desk_cfg(n_targets=0, n_clutter=0)
        with pytest.raises(ValueError, match="scatterer"):
            simulate_datacube(cfg)

    def test_out_of_span_velocity_rejected(self):
        cfg = desk_cfg()
        bad = Scatterer(range_bin=0, velocity=cfg.velocity_span, amplitude=1.0, phase=0.0)
        with pytest.raises(ValueError, match="span"):
            simulate_datacube(cfg, scatterers=[bad])

    def test_clutter_sits_near_zero_velocity(self):
        cfg = desk_cfg(n_targets=3, n_clutter=40, clutter_vel_sigma=0.05, seed=11)
        _, truth = simulate_datacube(cfg)
        clutter_v = [s.velocity for s in truth if s.kind == "clutter"]
        assert len(clutter_v) == 40
        assert np.max(np.abs(clutter_v)) < 0.05 * 5


class TestTruncate:
    def test_factor_one_is_identity(self):
        cube, _ = simulate_datacube(desk_cfg())
        same = truncate_integration(cube, 1)
        assert np.array_equal(same.data, cube.data)

    def test_factor_four_keeps_prefix(self):
        cfg = desk_cfg(n_pulses=128, n_range=128, max_range=96.0)
        cube, _ = simulate_datacube(cfg)
        short = truncate_integration(cube, 4)
        assert short.n_pulses == 32
        assert np.array_equal(short.data, cube.data[:32])
        assert short.pri == cube.pri

    def test_factor_eight_on_128(self):
        cfg = desk_cfg(n_pulses=128, n_range=128, max_range=96.0)
        cube, _ = simulate_datacube(cfg)
        assert truncate_integration(cube, 8).n_pulses == 16

    @pytest.mark.parametrize("factor", [0, 3, 5, 16])
    def test_bad_factor_rejected(self, factor):
        cube, _ = simulate_datacube(desk_cfg())
        with pytest.raises(ValueError):
            truncate_integration(cube, factor)


class TestDopplerBinMapping:
    def test_zero_velocity_hits_center(self):
        assert velocity_to_doppler_bin(0.0, 128, 0.23) == 64.0

    def test_one_resolution_step(self):
        assert velocity_to_doppler_bin(0.23, 128, 0.23) == pytest.approx(65.0)

    def test_half_step_negative(self):
        assert velocity_to_doppler_bin(-0.115, 128, 0.23) == pytest.approx(63.5)

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            v = rng.uniform(-0.49, 0.49) * 128 * 0.23
            b = velocity_to_doppler_bin(v, 128, 0.23)
            assert doppler_bin_to_velocity(b, 128, 0.23) == pytest.approx(v, abs=1e-12)

    def test_out_of_span_rejected(self):
        with pytest.raises(ValueError):
            velocity_to_doppler_bin(20.0, 128, 0.23)
