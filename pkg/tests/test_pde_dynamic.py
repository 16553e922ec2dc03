import numpy as np
import pytest

from pdeapprox.models import ModelSpec, smooth_initial
from pdeapprox.pde_dynamic import (NonParabolicError, assemble_dynamic, solve_dynamic,
                                   truncation_residual)
from pdeapprox.spectral import solve_spectral

from conftest import const

Z = np.linspace(0, 1, 23)


def powers(p):
    """``(z^p, (z^p)', (z^p)'')`` as polynomials."""
    poly = np.polynomial.Polynomial([0] * p + [1])
    return poly, poly.deriv(), poly.deriv(2)


def test_symmetric_voter_coefficients():
    N = 20
    prob = assemble_dynamic(ModelSpec("voter", 0.5, 0.5).field(N))
    h = 1 / N
    assert np.allclose(prob.D(Z), h * h)
    assert np.allclose(prob.V(Z), 0)
    assert np.allclose(prob.R(Z[1:-1]), 0)
    assert prob.left_flux == pytest.approx(h)
    assert prob.right_flux == pytest.approx(-h)
    assert prob.left_reaction == 0 and prob.right_reaction == 0
    assert prob.parabolic


def test_general_voter_coefficients():
    N, tau, gamma = 40, 0.7, 0.3
    prob = assemble_dynamic(ModelSpec("voter", tau, gamma).field(N))
    h = 1 / N
    assert np.allclose(prob.D(Z), (tau + gamma) * h * h)
    assert np.allclose(prob.V(Z), 2 * (gamma - tau) * h)
    assert np.allclose(prob.R(Z[1:-1]), 0, atol=1e-15)
    assert prob.left_reaction == pytest.approx(2 * (gamma - tau))
    assert prob.right_reaction == pytest.approx(-2 * (gamma - tau))


def test_reaction_only_coefficients(constant_field):
    prob = assemble_dynamic(constant_field(10, a=0.0, b=-0.3, c=0.0))
    assert np.allclose(prob.D(Z), 0) and np.allclose(prob.V(Z), 0)
    assert np.allclose(prob.R(Z), -0.3)
    assert prob.left_reaction == -0.3 and prob.right_reaction == -0.3


def test_constants_are_stationary():
    prob = assemble_dynamic(ModelSpec("voter", 0.5, 0.5).field(30))
    u = solve_dynamic(prob, lambda z: np.ones_like(z), 10.0)
    assert np.allclose(u.values, 1.0, rtol=0, atol=1e-9)


def test_reaction_only_solution(constant_field):
    prob = assemble_dynamic(constant_field(10, a=0.0, b=-0.3, c=0.0))
    u = solve_dynamic(prob, lambda z: np.cos(3 * z), 1.0)
    assert np.allclose(u.values, np.cos(3 * u.z) * np.exp(-0.3), rtol=0, atol=1e-8)


def test_agrees_with_spectral_solution():
    N = 50
    u0, _ = smooth_initial("sin2", N)
    u = solve_dynamic(assemble_dynamic(ModelSpec("voter", 0.5, 0.5).field(N)), u0, 1.0, M=400)
    z = np.arange(N + 1) / N
    # the spectral side needs J well above 40 to resolve sin^2 to 1e-5
    s = solve_spectral(1 / N, 1.0, 320, u0, 1.0, z)
    assert np.max(np.abs(u.values[::8] - s.values)) <= 1e-5


def test_sis_negative_diffusion_is_detected():
    prob = assemble_dynamic(ModelSpec("sis", 2.0, 1.0).field(100))
    assert not prob.parabolic
    lo, hi = prob.negative_intervals[0]
    assert lo == 0.0 and hi <= 0.011
    u0, _ = smooth_initial("sin2", 100)
    with pytest.raises(NonParabolicError):
        solve_dynamic(prob, u0, 0.01)
    u = solve_dynamic(prob, u0, 0.01, clamp_diffusion=True)
    assert np.all(np.isfinite(u.values))


def test_voter_is_always_parabolic():
    for tau, gamma in [(0.5, 0.5), (0.7, 0.3), (0.01, 3.0)]:
        assert assemble_dynamic(ModelSpec("voter", tau, gamma).field(25)).parabolic


def test_solver_grid_must_be_fine_enough():
    prob = assemble_dynamic(ModelSpec("voter", 0.5, 0.5).field(20))
    with pytest.raises(ValueError):
        solve_dynamic(prob, lambda z: z, 1.0, M=40)


def test_residual_vanishes_for_constants():
    inter, bnd = truncation_residual(ModelSpec("voter", 0.5, 0.5).field(32), powers(0))
    assert inter == 0.0 and bnd == 0.0


def test_residual_of_quadratic_is_roundoff(constant_field):
    # the symmetric three-point stencil is exact on quadratics
    for N in (64, 128):
        inter, _ = truncation_residual(constant_field(N), powers(2))
        assert inter <= 1e-12


def test_boundary_residual_is_second_order(constant_field):
    _, b64 = truncation_residual(constant_field(64), powers(3))
    _, b128 = truncation_residual(constant_field(128), powers(3))
    assert 3 <= b64 / b128 <= 5


def test_interior_residual_is_third_order():
    field = ModelSpec("voter", 0.7, 0.3).field
    r64, _ = truncation_residual(field(64), powers(3))
    r128, _ = truncation_residual(field(128), powers(3))
    assert 6 <= r64 / r128 <= 10
    # exact value: (c - a) h^3 f'''/6 * 2 with c - a = -0.8
    assert r64 == pytest.approx(0.8 / 64**3, rel=1e-6)
