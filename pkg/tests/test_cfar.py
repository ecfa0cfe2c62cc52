import numpy as np
import pytest

from dsrlab.cfar import CfarConfig, DetectionList, threshold_factor, ca_cfar_2d, group_detections
from dsrlab.spectral import RDMap


class TestThresholdFactor:
    def test_reference_value(self):
        # 24 * (1000^(1/24) - 1), evaluated independently
        assert threshold_factor(24, 1e-3) == pytest.approx(8.004514371919775, rel=1e-12)
        assert threshold_factor(24, 1e-3) == pytest.approx(8.004, abs=1e-3)

    def test_unit_case(self):
        assert threshold_factor(1, 0.5) == pytest.approx(1.0)

    def test_decreasing_in_pfa(self):
        pfas = np.logspace(-6, -1, 30)
        alphas = [threshold_factor(24, p) for p in pfas]
        assert np.all(np.diff(alphas) < 0)

    def test_vectorized_counts(self):
        out = threshold_factor(np.array([10.0, 144.0]), 1e-3)
        assert out.shape == (2,)
        assert out[1] == pytest.approx(144 * (1e-3 ** (-1 / 144) - 1))

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            threshold_factor(0, 1e-3)
        with pytest.raises(ValueError):
            threshold_factor(8, 0.0)
        with pytest.raises(ValueError):
            threshold_factor(8, 1.0)


class TestCaCfar2d:
    def test_flat_map_no_detections(self):
        m = RDMap(values=np.ones((32, 32)))
        for pfa in (1e-1, 1e-2, 1e-3):
            dets = ca_cfar_2d(m, CfarConfig(pfa=pfa))
            assert len(dets) == 0

    def test_single_spike_detected_exactly_once(self):
        values = np.ones((32, 32))
        values[16, 16] = 100.0
        dets = ca_cfar_2d(RDMap(values=values), CfarConfig())
        assert dets.indices() == [(16, 16)]
        (r, d, v, t) = dets.detections[0]
        assert v == pytest.approx(100.0)
        # interior cell: 144 training cells all equal 1
        assert t == pytest.approx(threshold_factor(144, 1e-3), rel=1e-12)

    def test_detection_rows_row_major_and_above_threshold(self):
        rng = np.random.default_rng(0)
        values = rng.exponential(1.0, size=(64, 64))
        dets = ca_cfar_2d(RDMap(values=values), CfarConfig(pfa=5e-2))
        cells = dets.indices()
        assert cells == sorted(cells)
        for r, d, v, t in dets.detections:
            assert v > t

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        values = rng.exponential(1.0, size=(48, 48))
        base = ca_cfar_2d(RDMap(values=values), CfarConfig()).indices()
        for c in (1e-6, 3.7, 1e6):
            scaled = ca_cfar_2d(RDMap(values=c * values), CfarConfig()).indices()
            assert scaled == base

    def test_empirical_false_alarm_rate(self):
        # unit-mean exponential noise == linear power of complex Gaussian
        rng = np.random.default_rng(42)
        values = rng.exponential(1.0, size=(1000, 1000))
        cfg = CfarConfig()  # pfa 1e-3
        dets = ca_cfar_2d(RDMap(values=values), cfg)
        rate = len(dets) / values.size
        assert 0.5 * cfg.pfa <= rate <= 2.0 * cfg.pfa

    def test_determinism(self):
        rng = np.random.default_rng(3)
        values = rng.exponential(1.0, size=(64, 64))
        a = ca_cfar_2d(RDMap(values=values), CfarConfig()).detections
        b = ca_cfar_2d(RDMap(values=values), CfarConfig()).detections
        assert a == b

    def test_wrap_boundary_in_doppler(self):
        values = np.ones((32, 32))
        values[16, 0] = 200.0
        clip = ca_cfar_2d(RDMap(values=values), CfarConfig(boundary="clip"))
        wrap = ca_cfar_2d(RDMap(values=values), CfarConfig(boundary="wrap"))
        assert (16, 0) in clip.indices()
        assert (16, 0) in wrap.indices()
        # wrapped training ring sees the spike from the other edge
        interior = [t for (r, d, v, t) in wrap.detections if (r, d) == (16, 0)][0]
        clipped = [t for (r, d, v, t) in clip.detections if (r, d) == (16, 0)][0]
        assert interior != clipped

    def test_non_linear_domain_rejected(self):
        m = RDMap(values=np.zeros((32, 32)), domain="log_db", floor_db=-60.0)
        with pytest.raises(ValueError, match="linear"):
            ca_cfar_2d(m, CfarConfig())

    def test_map_smaller_than_window_rejected(self):
        with pytest.raises(ValueError, match="smaller"):
            ca_cfar_2d(RDMap(values=np.ones((8, 8))), CfarConfig(guard=2, train=4))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CfarConfig(train=0)
        with pytest.raises(ValueError):
            CfarConfig(pfa=1.5)
        with pytest.raises(ValueError):
            CfarConfig(boundary="mirror")


class TestGrouping:
    def test_cluster_collapses_to_peak_cell(self):
        values = np.ones((32, 32))
        values[10, 10] = 50.0
        values[10, 11] = 80.0
        values[11, 11] = 60.0
        m = RDMap(values=values)
        dets = ca_cfar_2d(m, CfarConfig())
        assert len(dets) == 3
        grouped = group_detections(dets, m)
        assert grouped.indices() == [(10, 11)]

    def test_separated_spikes_stay_separate(self):
        values = np.ones((32, 32))
        values[8, 8] = 100.0
        values[20, 24] = 90.0
        m = RDMap(values=values)
        grouped = group_detections(ca_cfar_2d(m, CfarConfig()), m)
        assert grouped.indices() == [(8, 8), (20, 24)]

    def test_empty_input(self):
        m = RDMap(values=np.ones((16, 16)))
        grouped = group_detections(DetectionList(), m)
        assert len(grouped) == 0

    def test_json_rows(self):
        values = np.ones((32, 32))
        values[16, 16] = 100.0
        dets = ca_cfar_2d(RDMap(values=values), CfarConfig())
        rows = dets.to_json_rows()
        assert rows[0]["r"] == 16 and rows[0]["d"] == 16
        assert rows[0]["value"] > rows[0]["threshold"]
