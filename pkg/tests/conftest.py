import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from divrisk import ModelParams


@pytest.fixture
def base():
    """s = 1, d = 0.25: the running example."""
    return ModelParams(1.0, 0.25)
