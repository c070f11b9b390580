import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cqcap.channel import validate_channel  # noqa: E402


def pure_pair(c):
    a = np.array([1.0, 0.0])
    b = np.array([c, math.sqrt(1 - c * c)])
    return validate_channel([np.outer(a, a), np.outer(b, b)])


def bsc(p):
    return validate_channel([np.diag([1 - p, p]), np.diag([p, 1 - p])])


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def orthogonal_pair():
    return validate_channel([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])


@pytest.fixture
def overlap_half():
    return pure_pair(0.5)
