import numpy as np
import pytest

from qdensity import SurvivalSample, km_fit
from qdensity.rng import stream


@pytest.fixture
def censored_sample():
    """A fixed moderately censored exponential sample (n=100, ~25% censored)."""
    rng = stream(314, 0)
    latent = rng.exponential(1.0 / 1.5, 100)
    cens = rng.exponential(2.0, 100)
    return SurvivalSample(np.minimum(latent, cens), latent <= cens)


@pytest.fixture
def censored_curve(censored_sample):
    return km_fit(censored_sample)
