"""dsrlab: a desk-scale Doppler super-resolution laboratory.

Simulates range-Doppler maps, degrades them by integration-time truncation,
super-resolves via zero-padded FFT, MUSIC and a conditional diffusion
refiner, and judges the methods with CA-CFAR detection metrics.
"""

from .scenario import (
    ScenarioConfig,
    Scatterer,
    SlowTimeCube,
    simulate_datacube,
    cube_from_scatterers,
    truncate_integration,
    velocity_to_doppler_bin,
    doppler_bin_to_velocity,
)
from .spectral import (
    RDMap,
    NormParams,
    blackman_window,
    rd_map_from_cube,
    to_log_normalized,
    denormalize,
    log_db_to_linear,
    save_rdmap,
    load_rdmap,
)
from .music import CovarianceEstimate, smoothed_covariance, music_pseudospectrum, music_rd_map
from .cfar import CfarConfig, DetectionList, threshold_factor, ca_cfar_2d, group_detections
from .pipeline import (
    DatasetRecord,
    MatchReport,
    generate_dataset,
    load_manifest,
    match_detections,
    evaluate_methods,
    psnr,
)
from .estimators import (
    FftSuperResolver,
    MusicSuperResolver,
    LogNormalizer,
    DiffusionSuperResolver,
    CaCfarDetector,
)

__version__ = "0.1.0"
