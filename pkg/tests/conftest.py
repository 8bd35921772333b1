import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("chainsim", max_examples=40, deadline=None)
settings.load_profile("chainsim")


@pytest.fixture
def grid40():
    return np.linspace(0.0, 40.0, 2000)
