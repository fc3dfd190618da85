import numpy as np
import pandas as pd
import pytest

from ttad.detectors import DetectorConfig
from ttad.svd_engine import TruncationPolicy
from ttad.tensor_core import FactorShape


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_cfg():
    """Build a DetectorConfig from short keyword options."""

    def _make(method="acg", shape=(2, 2, 2, 2), tau=0.0, scaler=False, **kwargs):
        return DetectorConfig(
            method=method,
            shape=FactorShape(factors=tuple(shape)),
            policy=TruncationPolicy.of(tau),
            scaler=scaler,
            **kwargs,
        )

    return _make


@pytest.fixture
def labelled_csv(tmp_path, rng):
    """60 rows of 16 features: class 0 shares one pattern, classes 1 and 2 are noise."""
    pattern = np.linspace(1.0, 2.0, 16)
    normal = pattern * rng.uniform(0.8, 1.2, size=(30, 1)) + 0.05 * rng.normal(size=(30, 16))
    anomalous = rng.normal(size=(30, 16))
    frame = pd.DataFrame(np.vstack([normal, anomalous]), columns=[f"f{i}" for i in range(16)])
    frame["label"] = [0] * 30 + [1] * 15 + [2] * 15
    path = tmp_path / "data.csv"
    frame.to_csv(path, index=False)
    return path
