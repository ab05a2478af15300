import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from odelie.numeric import ZeroTestConfig

# derandomize: every run draws the same cases
settings.register_profile(
    "odelie",
    max_examples=120,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("odelie")

np.seterr(all="ignore")


@pytest.fixture
def cfg():
    return ZeroTestConfig(seed=0x5EED)
