import numpy as np
import pytest

from pdeapprox.coeffs import CoefficientField


def const(value):
    def fn(z):
        return np.full(np.shape(z), float(value))
    return fn


@pytest.fixture
def constant_field():
    """``a = c = 1, b = -2`` at a given N."""
    def make(N, a=1.0, b=-2.0, c=1.0):
        return CoefficientField(const(a), const(b), const(c), N)
    return make
