import numpy as np
import pytest

from dsrlab.scenario import ScenarioConfig


@pytest.fixture(scope="session")
def desk_cfg():
    return ScenarioConfig(
        n_pulses=32, n_range=32, max_range=24.0, n_targets=2, n_clutter=1, snr_db=15.0, seed=7
    )


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A barely-trained desk denoiser for interface-level tests."""
    from dsrlab.diffusion.training import TrainingConfig, train_denoiser

    rng = np.random.default_rng(0)
    x0 = np.clip(rng.standard_normal((8, 32, 32)) * 0.3, -1, 1)
    y = np.clip(rng.standard_normal((8, 32, 32)) * 0.3, -1, 1)
    out = tmp_path_factory.mktemp("tiny_model")
    result = train_denoiser(
        x0, y, hyper=TrainingConfig(epochs=2, batch_size=4, T=16), seed=0, out_dir=out
    )
    return result.checkpoint_path
