import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from polytv.quadpoly import QuadPoly  # noqa: E402


def random_poly(rng, n, scale=1.0):
    m = rng.standard_normal((n, n))
    return QuadPoly(scale * 0.5 * (m + m.T), scale * rng.standard_normal(n),
                    float(scale * rng.standard_normal()))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
