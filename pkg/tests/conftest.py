import numpy as np
import pytest

from degnn import engine
from degnn.synthetic import planted_clusters


@pytest.fixture(autouse=True)
def _float64_engine():
    engine.set_dtype(np.float64)
    yield
    engine.set_dtype(np.float64)


@pytest.fixture
def toy_dataset():
    return planted_clusters(n_nodes=40, seed=7)
