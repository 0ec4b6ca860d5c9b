import numpy as np
import pytest

from towerbench.tensor import precision


@pytest.fixture
def f64():
    """Run the test body with 64-bit tensors."""
    with precision("f64"):
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
