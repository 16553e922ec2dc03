import numpy as np
import pytest

from pdeapprox.coeffs import build_matrix
from pdeapprox.models import ModelSpec, smooth_initial
from pdeapprox.pde_dynamic import NonParabolicError, assemble_dynamic, solve_dynamic
from pdeapprox.pde_robin import (alpha_beta, assemble_robin, discrete_robin_system, robin_initial_grid,
                                 robin_nodes, robin_operator, robin_truncation_residual, solve_robin)

from conftest import const

Z = np.linspace(-0.05, 1.05, 31)


def test_alpha_beta_examples(constant_field):
    al, be = alpha_beta(constant_field(10, a=2.0, c=2.0))
    assert np.allclose(be(Z), 0.0)
    tau, gamma, N = 0.7, 0.3, 20
    h = 1 / N
    al, be = alpha_beta(ModelSpec("voter", tau, gamma).field(N))
    assert np.allclose(al(Z), (tau + gamma) * h * h)
    assert np.allclose(be(Z), 2 * (gamma - tau) * h)
    al, be = alpha_beta(constant_field(10, a=0.0, b=0.0, c=1.0))
    assert np.allclose(al(Z), 0.01 / 2)
    assert np.allclose(be(Z), 0.1)


def test_pure_neumann_case(constant_field):
    prob = assemble_robin(constant_field(10))
    assert np.allclose(prob.alpha(Z), 0.01)
    assert np.allclose(prob.beta(Z), 0.0)
    assert prob.z_left == -0.05 and prob.z_right == pytest.approx(1.05)


def test_sis_alpha_negative_at_left_end():
    prob = assemble_robin(ModelSpec("sis", 1.0, 1.0).field(10))
    assert prob.alpha(-0.05) == pytest.approx((-0.0525 - 0.005) / 2)
    assert not prob.parabolic
    with pytest.raises(NonParabolicError):
        solve_robin(prob, lambda z: np.ones_like(z), 0.1)


def test_constants_are_stationary_under_neumann(constant_field):
    prob = assemble_robin(constant_field(20))
    u = solve_robin(prob, lambda z: np.ones_like(z), 10.0)
    assert np.allclose(u.values, 1.0, rtol=0, atol=1e-9)


@pytest.mark.parametrize("tau,gamma,init", [(0.5, 0.5, "sin2"), (0.7, 0.3, "gaussian"), (0.2, 1.1, "poly")])
def test_integral_is_conserved(tau, gamma, init):
    N = 40
    prob = assemble_robin(ModelSpec("voter", tau, gamma).field(N))
    u0, _ = smooth_initial(init, N)
    g0 = robin_initial_grid(prob, u0)
    u = solve_robin(prob, g0, 5.0)
    assert abs(prob.conserved_integral(u) - prob.conserved_integral(g0)) <= 1e-7 * prob.conserved_integral(g0)


def test_agrees_with_dynamic_to_second_order():
    model = ModelSpec("voter", 0.7, 0.3)
    diffs = {}
    for N in (50, 100):
        u0, _ = smooth_initial("sin2", N)
        z = np.arange(N + 1) / N
        ud = solve_dynamic(assemble_dynamic(model.field(N)), u0, 1.0)
        ur = solve_robin(assemble_robin(model.field(N)), u0, 1.0)
        a = ud.values[[ud.node_index(x) for x in z]]
        b = ur.values[[ur.node_index(x) for x in z]]
        diffs[N] = np.max(np.abs(a - b))
    C = diffs[50] * 50**2
    assert diffs[100] <= 1.5 * C / 100**2


@pytest.mark.parametrize("tau,gamma,N", [(0.5, 0.5, 10), (0.7, 0.3, 10), (0.7, 0.3, 37)])
def test_coarse_scheme_reproduces_voter_generator(tau, gamma, N):
    field = ModelSpec("voter", tau, gamma).field(N)
    A = discrete_robin_system(field).to_dense()
    assert np.max(np.abs(A - build_matrix(field).to_dense())) <= 1e-13


def test_coarse_scheme_reproduces_sis_generator():
    field = ModelSpec("sis", 2.0, 1.0).field(8)
    A = discrete_robin_system(field).to_dense()
    assert np.max(np.abs(A - build_matrix(field).to_dense())) <= 1e-12


def test_zero_field_gives_zero_system(constant_field):
    sys = discrete_robin_system(constant_field(6, a=0.0, b=0.0, c=0.0))
    assert np.array_equal(sys.to_dense(), np.zeros((7, 7)))


def test_unit_refinement_operator_is_the_generator():
    field = ModelSpec("voter", 0.7, 0.3).field(12)
    ab, z = robin_operator(assemble_robin(field), 12)
    assert np.allclose(z, np.arange(13) / 12)
    sys = build_matrix(field)
    assert np.allclose(ab[2, :-1], sys.sub, rtol=1e-13)
    assert np.allclose(ab[1], sys.diag, rtol=1e-13)
    assert np.allclose(ab[0, 1:], sys.sup, rtol=1e-13)


def test_grid_contains_coarse_points():
    z, dz = robin_nodes(10, 90)
    assert np.allclose(z[4::9], np.arange(11) / 10)
    assert z[0] - dz / 2 == pytest.approx(-0.05)
    with pytest.raises(ValueError):
        robin_nodes(10, 80)


def robin_test_function(h):
    """``g^2 (1 + z)`` with ``g = (z + h/2)(1 + h/2 - z)``: value and slope vanish at both ends."""
    def g(z):
        return (z + h / 2) * (1 + h / 2 - z)

    def f(z):
        return g(z) ** 2 * (1 + z)

    def df(z):
        return 2 * g(z) * (1 - 2 * z) * (1 + z) + g(z) ** 2

    def d2f(z):
        return (2 * (1 - 2 * z) ** 2 - 4 * g(z)) * (1 + z) + 4 * g(z) * (1 - 2 * z)

    return f, df, d2f


def test_truncation_orders():
    field = ModelSpec("voter", 0.7, 0.3).field
    r = [robin_truncation_residual(field(N), robin_test_function(1 / N)) for N in (50, 100, 200)]
    for (i0, b0), (i1, b1) in zip(r, r[1:]):
        assert 6 <= i0 / i1 <= 10
        assert 3 <= b0 / b1 <= 5


def test_mollified_delta_runs_on_fine_grid():
    from pdeapprox.models import DeltaInitial
    N = 200
    prob = assemble_robin(ModelSpec("voter", 0.7, 0.3).field(N))
    d = DeltaInitial(39, N)
    u = solve_robin(prob, d.mollified(), 20.0)
    assert np.all(u.values > -1e-12)
    g0 = robin_initial_grid(prob, d.mollified())
    assert prob.conserved_integral(u) == pytest.approx(prob.conserved_integral(g0), rel=1e-9)
