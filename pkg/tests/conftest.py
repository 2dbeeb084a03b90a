import numpy as np
import pytest

from coopsense.scenario import (
    NoiseParams,
    PropagationParams,
    build_hypothesis_model,
    sample_placement,
)

# Baseline propagation settings used throughout the suite (also the
# package defaults): 0.97 dBm transmit power, exponent 3.3, unit
# reference distance, zero antenna constant and detector mean.
BASELINE_PROP = PropagationParams(
    transmit_power_dbm=0.97,
    antenna_const_db=0.0,
    path_loss_exponent=3.3,
    reference_distance=1.0,
    detector_mean_dbm=0.0,
)


def make_model(
    seed: int,
    n: int = 10,
    m: int = 10,
    alpha: float = 1.0,
    sigma0_sq: float = 1.0,
    edge: float = 0.1,
    pt_distance: float = 1.0,
):
    """One seeded scenario realization with shadow_var = alpha * sigma0_sq."""
    rng = np.random.default_rng(seed)
    placement = sample_placement(rng, n, edge, pt_distance)
    noise = NoiseParams(
        noise_var=sigma0_sq, shadow_var=alpha * sigma0_sq, decorr_distance=0.14
    )
    return build_hypothesis_model(placement, BASELINE_PROP, noise, m)


@pytest.fixture
def baseline_prop():
    return BASELINE_PROP
