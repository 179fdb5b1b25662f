import numpy as np
import pytest

from cardionet.synthetic import write_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def synthetic_root(tmp_path_factory):
    """Small on-disk three-pattern dataset shared across the session."""
    root = tmp_path_factory.mktemp("synthetic")
    write_dataset(root, train_per_class=4, valid_per_class=2, test_count=5, seed=11)
    return root


@pytest.fixture(scope="session")
def tiny_arch():
    """Network config small enough for exhaustive finite differences."""
    from cardionet import CardioNetConfig
    return CardioNetConfig(input_size=16, conv_channels=(2, 3, 3, 4), fc_widths=(10, 8, 6))
