import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-size Monte Carlo runs")


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def run_dir(tmp_path, monkeypatch):
    from config.config import Config
    monkeypatch.setattr(Config, 'OUTPUT_DIR', str(tmp_path))
    return tmp_path
