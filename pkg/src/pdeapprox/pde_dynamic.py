"""The approximating PDE with dynamic (Wentzell) boundary conditions.

Interior, for z in (0, 1)::

    u_t = D(z) u_zz + V(z) u_z + R(z) u
    D(z) = h^2/2 (a(z-h) + c(z+h)),  V(z) = h (c(z+h) - a(z-h)),
    R(z) = a(z-h) + b(z) + c(z+h)

and at the ends::

    u_t(t,0) =  h c(h)   u_z(t,0) + (c(h) + b(0))   u(t,0)
    u_t(t,1) = -h a(1-h) u_z(t,1) + (a(1-h) + b(1)) u(t,1)
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coeffs import build_matrix
from .grid import GridFunction
from .ode import integrate_banded

DEFAULT_REFINE = 8
MIN_REFINE = 4


class NonParabolicError(ValueError):
    """Diffusion coefficient is negative somewhere on the solver grid."""


@dataclass(frozen=True)
class DynamicPdeProblem:
    field: object
    h: float
    D: Callable
    V: Callable
    R: Callable
    left_flux: float
    left_reaction: float
    right_flux: float
    right_reaction: float
    parabolic: bool
    negative_intervals: tuple = ()

    def boundary_operator(self, f0, df0, f1, df1):
        """The pair ``B f`` from values and slopes at z = 0 and z = 1."""
        return (self.left_flux * df0 + self.left_reaction * f0,
                self.right_flux * df1 + self.right_reaction * f1)

    def apply(self, f, df, d2f, z):
        """``D f'' + V f' + R f`` at ``z``."""
        return self.D(z) * d2f(z) + self.V(z) * df(z) + self.R(z) * f(z)


def _negative_runs(z, values):
    """Closed intervals of ``z`` (between neighbouring nodes) where ``values < 0``."""
    runs = []
    bad = values < 0
    j = 0
    while j < bad.size:
        if bad[j]:
            start = j
            while j + 1 < bad.size and bad[j + 1]:
                j += 1
            lo = z[max(start - 1, 0)]
            hi = z[min(j + 1, bad.size - 1)]
            runs.append((float(lo), float(hi)))
        j += 1
    return tuple(runs)


def assemble_dynamic(field, check_M=None):
    """Build D, V, R and the boundary coefficients from ``field``.

    The parabolic flag is evaluated on the grid with ``check_M`` cells
    (default 8N).
    """
    h = field.h

    def D(z):
        z = np.asarray(z, dtype=float)
        return 0.5 * h * h * (field.eval_a(z - h) + field.eval_c(z + h))

    def V(z):
        z = np.asarray(z, dtype=float)
        return h * (field.eval_c(z + h) - field.eval_a(z - h))

    def R(z):
        z = np.asarray(z, dtype=float)
        return field.eval_a(z - h) + field.eval_b(z) + field.eval_c(z + h)

    c_h = float(field.eval_c(h))
    a_1h = float(field.eval_a(1.0 - h))
    M = DEFAULT_REFINE * field.N if check_M is None else int(check_M)
    z = np.arange(M + 1) / M
    runs = _negative_runs(z, D(z))
    return DynamicPdeProblem(
        field=field, h=h, D=D, V=V, R=R,
        left_flux=h * c_h, left_reaction=c_h + float(field.eval_b(0.0)),
        right_flux=-h * a_1h, right_reaction=a_1h + float(field.eval_b(1.0)),
        parabolic=not runs, negative_intervals=runs)


def dynamic_operator(problem, M, clamp_diffusion=False):
    """Method-of-lines matrix on the M-cell grid of [0, 1], band storage (kl = ku = 2)."""
    dz = 1.0 / M
    z = np.arange(M + 1) * dz
    Dz = problem.D(z)
    if np.any(Dz[1:-1] < 0):
        if not clamp_diffusion:
            runs = _negative_runs(z, Dz)
            raise NonParabolicError(f"negative diffusion on {list(runs)}; pass clamp_diffusion=True "
                                    "to clamp D to max(D, 0)")
        Dz = np.maximum(Dz, 0.0)
    Vz = problem.V(z)
    Rz = problem.R(z)
    n = M + 1
    ab = np.zeros((5, n))  # ab[2 + i - j, j] = A[i, j]

    def put(i, j, val):
        ab[2 + i - j, j] = val

    i = np.arange(1, M)
    lower = Dz[i] / dz**2 - Vz[i] / (2 * dz)
    upper = Dz[i] / dz**2 + Vz[i] / (2 * dz)
    ab[3, i - 1] = lower            # A[i, i-1]
    ab[2, i] = -2 * Dz[i] / dz**2 + Rz[i]
    ab[1, i + 1] = upper            # A[i, i+1]
    # one-sided three-point slopes at the ends
    lf, rf = problem.left_flux / (2 * dz), problem.right_flux / (2 * dz)
    put(0, 0, -3 * lf + problem.left_reaction)
    put(0, 1, 4 * lf)
    put(0, 2, -lf)
    put(M, M, 3 * rf + problem.right_reaction)
    put(M, M - 1, -4 * rf)
    put(M, M - 2, rf)
    return ab


def solve_dynamic(problem, u0, t_final, M=None, rel_tol=1e-10, abs_tol=1e-13,
                  clamp_diffusion=False, max_steps=None):
    """Method-of-lines solution of the dynamic-boundary problem at ``t_final``.

    ``u0`` is a callable on [0, 1] or a ``GridFunction`` on the M-cell grid.
    """
    N = problem.field.N
    if isinstance(u0, GridFunction):
        if u0.z_min != 0.0 or u0.z_max != 1.0:
            raise ValueError("initial data must live on [0, 1]")
        if M is None:
            M = u0.M
        elif M != u0.M:
            raise ValueError(f"initial grid has {u0.M} cells, solver asked for {M}")
        values = u0.values
    else:
        M = DEFAULT_REFINE * N if M is None else int(M)
        values = GridFunction.sample(u0, 0.0, 1.0, M).values
    if M < MIN_REFINE * N:
        raise ValueError(f"M={M} must be at least {MIN_REFINE}N = {MIN_REFINE * N}")
    ab = dynamic_operator(problem, M, clamp_diffusion=clamp_diffusion)
    kwargs = {} if max_steps is None else {"max_steps": max_steps}
    y = integrate_banded(ab, 2, 2, values, t_final, rel_tol, abs_tol, **kwargs)
    return GridFunction(0.0, 1.0, y, float(t_final))


def truncation_residual(field, f, N=None):
    """Consistency defects of the ODE against the PDE on ``f``.

    ``f`` is a triple of callables ``(f, f', f'')``.  Returns
    ``(interior, boundary)``: the largest ``|(A_N f_N)_k - (D_m f)(k/N)|`` over
    ``1 <= k <= N-1`` and the larger of the two boundary defects against ``B f``.
    """
    if N is not None and N != field.N:
        raise ValueError("N must match the field's N")
    fn, dfn, d2fn = f
    N = field.N
    sys = build_matrix(field)
    problem = assemble_dynamic(field)
    z = np.arange(N + 1) / N
    Af = sys.matvec(fn(z))
    Df = problem.apply(fn, dfn, d2fn, z[1:-1])
    interior = float(np.max(np.abs(Af[1:-1] - Df)))
    b0, b1 = problem.boundary_operator(float(fn(0.0)), float(dfn(0.0)),
                                       float(fn(1.0)), float(dfn(1.0)))
    boundary = max(abs(Af[0] - b0), abs(Af[-1] - b1))
    return interior, float(boundary)
