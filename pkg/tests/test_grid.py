import numpy as np
import pytest

from pdeapprox.grid import GridFunction


def test_sample_and_nodes():
    g = GridFunction.sample(np.sin, 0.0, 1.0, 8)
    assert g.M == 8
    assert g.spacing == 0.125
    assert np.allclose(g.values, np.sin(g.z))
    assert g.node_index(0.375) == 3
    assert g.node_index(0.3) is None
    assert g.node_index(1.5) is None


def test_shifted_grid_nodes():
    g = GridFunction(-0.05, 1.05, np.zeros(23))
    assert g.node_index(0.0) == 1
    assert g.node_index(1.0) == 21


def test_validation():
    with pytest.raises(ValueError):
        GridFunction(0.0, 1.0, np.zeros(2))
    with pytest.raises(ValueError):
        GridFunction(1.0, 0.0, np.zeros(5))
    with pytest.raises(ValueError):
        GridFunction(0.0, 1.0, [0.0, np.inf, 1.0])


def test_values_are_read_only():
    g = GridFunction(0.0, 1.0, np.zeros(5))
    with pytest.raises(ValueError):
        g.values[0] = 1.0
