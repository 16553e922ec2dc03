"""Divergence-form PDE with Robin conditions on [-h/2, 1 + h/2].

::

    u_t = (alpha u)_zz + (beta u)_z,      (alpha u)_z + beta u = 0 at both ends
    alpha(z) = h^2 (a(z) + c(z)) / 2,     beta(z) = h (c(z) - a(z))

The solver uses a cell-centred grid: the end points of the interval sit half a
cell outside the first and last node, exactly like the coarse grid ``k/N``
sits inside ``[-h/2, 1 + h/2]``.  The boundary condition is imposed at that
half point with a centred difference for the flux and the mean of node and
ghost for the value, and the ghost is eliminated.  On the coarse grid this
reproduces the tridiagonal generator of a stochastic field exactly, and on any
grid the column sums of the operator vanish, so ``sum(u) * dz`` is conserved.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coeffs import TridiagonalSystem, build_matrix
from .grid import GridFunction
from .ode import integrate_banded
from .pde_dynamic import NonParabolicError, _negative_runs

DEFAULT_REFINE = 9
MIN_REFINE = 4


def alpha_beta(field):
    """Diffusion ``alpha`` and drift ``beta`` functions of the divergence-form PDE."""
    h = field.h

    def alpha(z):
        return 0.5 * h * h * (field.eval_a(z) + field.eval_c(z))

    def beta(z):
        return h * (field.eval_c(z) - field.eval_a(z))

    return alpha, beta


@dataclass(frozen=True)
class RobinPdeProblem:
    field: object
    h: float
    alpha: Callable
    beta: Callable
    z_left: float
    z_right: float
    parabolic: bool
    negative_intervals: tuple = ()

    def conserved_integral(self, u):
        """Midpoint-rule integral of ``u`` over ``[z_left, z_right]``."""
        return float(np.sum(u.values) * u.spacing)

    def apply(self, f, df, d2f, z):
        """``(alpha f)'' + (beta f)'`` with ``alpha, beta`` differentiated numerically.

        Uses the exact ``f`` derivatives and fourth-order differences of the
        coefficients, which are smooth.
        """
        z = np.asarray(z, dtype=float)
        e = 1e-3 * self.h
        al, be = self.alpha, self.beta
        da = (8 * (al(z + e) - al(z - e)) - (al(z + 2 * e) - al(z - 2 * e))) / (12 * e)
        d2a = (16 * (al(z + e) + al(z - e)) - (al(z + 2 * e) + al(z - 2 * e)) - 30 * al(z)) / (12 * e * e)
        db = (8 * (be(z + e) - be(z - e)) - (be(z + 2 * e) - be(z - 2 * e))) / (12 * e)
        fz, dfz, d2fz = f(z), df(z), d2f(z)
        return d2a * fz + 2 * da * dfz + al(z) * d2fz + db * fz + be(z) * dfz


def robin_nodes(N, M):
    """Cell-centred nodes of the M-per-unit-length grid over ``[-h/2, 1 + h/2]``."""
    refine = M // N
    if M % N or refine % 2 == 0:
        raise ValueError(f"M must be an odd multiple of N so that k/N are nodes, got M={M}, N={N}")
    h = 1.0 / N
    dz = h / refine
    n = (N + 1) * refine
    return -0.5 * h + (np.arange(n) + 0.5) * dz, dz


def assemble_robin(field, check_M=None):
    """Robin problem for ``field`` with its parabolicity check."""
    alpha, beta = alpha_beta(field)
    h = field.h
    M = DEFAULT_REFINE * field.N if check_M is None else int(check_M)
    z, _ = robin_nodes(field.N, M)
    z = np.concatenate([[-0.5 * h], z, [1 + 0.5 * h]])
    runs = _negative_runs(z, alpha(z))
    return RobinPdeProblem(field=field, h=h, alpha=alpha, beta=beta,
                           z_left=-0.5 * h, z_right=1 + 0.5 * h,
                           parabolic=not runs, negative_intervals=runs)


def robin_bands(alpha_k, beta_k, dz):
    """Tridiagonal bands (sub, diag, sup) of the cell-centred scheme.

    Row j reads ``(al[j-1] u[j-1] - 2 al[j] u[j] + al[j+1] u[j+1]) / dz^2
    + (be[j+1] u[j+1] - be[j-1] u[j-1]) / (2 dz)``, with the end rows closed by
    ghost elimination through the boundary condition.
    """
    alpha_k = np.asarray(alpha_k, dtype=float)
    beta_k = np.asarray(beta_k, dtype=float)
    sub = alpha_k[:-1] / dz**2 - beta_k[:-1] / (2 * dz)
    sup = alpha_k[1:] / dz**2 + beta_k[1:] / (2 * dz)
    diag = -2 * alpha_k / dz**2
    diag[0] = -alpha_k[0] / dz**2 + beta_k[0] / (2 * dz)
    diag[-1] = -alpha_k[-1] / dz**2 - beta_k[-1] / (2 * dz)
    return sub, diag, sup


def discrete_robin_system(field):
    """Discretise the Robin problem on the coarse grid ``k/N``.

    For a stochastic field this is the generator ``build_matrix(field)``.
    """
    alpha, beta = alpha_beta(field)
    z = np.arange(field.N + 1) / field.N
    return TridiagonalSystem.from_bands(*robin_bands(alpha(z), beta(z), field.h))


def robin_operator(problem, M, clamp_diffusion=False):
    """Band storage (kl = ku = 1) of the fine-grid operator, with the node coordinates."""
    z, dz = robin_nodes(problem.field.N, M)
    al = problem.alpha(z)
    if np.any(al < 0):
        if not clamp_diffusion:
            raise NonParabolicError(f"negative alpha on {list(_negative_runs(z, al))}; pass "
                                    "clamp_diffusion=True to clamp alpha to max(alpha, 0)")
        al = np.maximum(al, 0.0)
    sub, diag, sup = robin_bands(al, problem.beta(z), dz)
    ab = np.zeros((3, z.size))
    ab[0, 1:] = sup
    ab[1] = diag
    ab[2, :-1] = sub
    return ab, z


def solve_robin(problem, u0, t_final, M=None, rel_tol=1e-10, abs_tol=1e-13,
                clamp_diffusion=False, max_steps=None):
    """Method-of-lines solution of the Robin problem at ``t_final``.

    ``M`` counts cells per unit length and must be an odd multiple of N
    (default 9N).  ``u0`` is a callable or a ``GridFunction`` on the nodes.
    """
    N = problem.field.N
    if isinstance(u0, GridFunction):
        if M is None:
            M = int(round((u0.M + 1) / (N + 1))) * N
        z, _ = robin_nodes(N, M)
        if u0.values.size != z.size or not np.isclose(u0.z_min, z[0]) or not np.isclose(u0.z_max, z[-1]):
            raise ValueError("initial grid does not match the Robin solver grid")
        values = u0.values
    else:
        M = DEFAULT_REFINE * N if M is None else int(M)
        z, _ = robin_nodes(N, M)
        values = np.broadcast_to(np.asarray(u0(z), dtype=float), z.shape)
    if M < MIN_REFINE * N:
        raise ValueError(f"M={M} must be at least {MIN_REFINE}N = {MIN_REFINE * N}")
    ab, z = robin_operator(problem, M, clamp_diffusion=clamp_diffusion)
    kwargs = {} if max_steps is None else {"max_steps": max_steps}
    y = integrate_banded(ab, 1, 1, values, t_final, rel_tol, abs_tol, **kwargs)
    return GridFunction(float(z[0]), float(z[-1]), y, float(t_final))


def robin_initial_grid(problem, u0, M=None):
    """Sample ``u0`` on the Robin solver nodes."""
    M = DEFAULT_REFINE * problem.field.N if M is None else int(M)
    z, _ = robin_nodes(problem.field.N, M)
    return GridFunction(float(z[0]), float(z[-1]), np.asarray(u0(z), dtype=float) * np.ones_like(z))


def robin_truncation_residual(field, f):
    """Defects of the coarse scheme against the divergence-form operator.

    ``f = (f, f', f'')`` should satisfy the Robin condition at both ends.
    Returns ``(interior, boundary)`` maxima over ``1..N-1`` and ``{0, N}``.
    """
    fn, dfn, d2fn = f
    problem = assemble_robin(field)
    sys = build_matrix(field) if field.stochastic else discrete_robin_system(field)
    z = np.arange(field.N + 1) / field.N
    defect = np.abs(sys.matvec(fn(z)) - problem.apply(fn, dfn, d2fn, z))
    return float(np.max(defect[1:-1])), float(max(defect[0], defect[-1]))
