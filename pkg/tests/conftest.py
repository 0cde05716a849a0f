import json
import numpy as np
import pytest

from src.config import Config


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def config():
    return Config.default()


@pytest.fixture
def write_json(tmp_path):
    """Writes a payload to tmp_path/<name> and returns the path as a string."""
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)
    return _write
