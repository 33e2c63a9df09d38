import numpy as np
import pytest

from gaussian_pgm.instances import scalar_instance


@pytest.fixture(scope="session")
def scalar():
    """The worked single-mode example: (ensemble, recycling state)."""
    return scalar_instance()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
