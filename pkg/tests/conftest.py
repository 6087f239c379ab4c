import math

import numpy as np
import pytest

from weakthermo import SpinParams

REF_SPIN = SpinParams(omega_z=4.8e6, omega_R=3e9)


@pytest.fixture
def ref_spin():
    return REF_SPIN


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (a + a.conj().T) / 2
    return scale * h / np.linalg.norm(h, 2)


def random_unit(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


QUARTER_PI = math.pi / 4
