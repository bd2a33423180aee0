import numpy as np
import pytest

from chirp2d import ChirpParams, NoiseSpec


@pytest.fixture
def par_choice() -> ChirpParams:
    from chirp2d import PAR_CHOICE

    return PAR_CHOICE


@pytest.fixture
def iid_noise():
    def make(sigma: float, seed: int = 901) -> NoiseSpec:
        return NoiseSpec(kind="iid-gaussian", sigma=sigma, seed=seed)

    return make


def lstsq_residual(design: np.ndarray, y: np.ndarray) -> float:
    """Generic least-squares residual oracle."""
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    r = y - design @ coef
    return float(r @ r)
