import numpy as np
import pytest

from qmce import make_spectrum


def random_nondegenerate(rng, dim, lo=-2.0, hi=2.0, min_gap=0.05):
    """Random sorted levels with all gaps at least min_gap."""
    while True:
        es = np.sort(rng.uniform(lo, hi, dim))
        if dim == 1 or np.min(np.diff(es)) >= min_gap:
            return es


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


# dims 2..8 with and without degeneracy, plus the Ising L=3 levels
BATTERY = [
    [(0.0, 1), (1.0, 1)],
    [(0.0, 1), (1.0, 1), (2.0, 1)],
    [(0.0, 1), (1.0, 3)],
    [(-1.0, 1), (0.5, 2), (2.0, 1), (3.0, 1)],
    [(0.0, 1), (0.7, 1), (1.1, 1), (2.0, 1), (3.2, 1)],
    [(0.0, 2), (1.0, 2), (2.0, 2)],
    [(0.0, 1), (1.0, 1), (2.0, 1), (3.0, 1), (4.0, 1), (5.0, 1), (6.0, 1)],
    [(-3.75, 1), (-0.75, 3), (1.25, 3), (2.25, 1)],
]


@pytest.fixture(params=BATTERY, ids=lambda lv: f"dim{sum(m for _, m in lv)}")
def battery_spectrum(request):
    return make_spectrum(request.param)
