"""Fourier method for the symmetric voter PDE with dynamic boundary conditions.

For ``u_t = alpha h^2 u_zz`` with ``u_t = alpha h u_z`` at z = 0 and
``u_t = -alpha h u_z`` at z = 1 the separated solutions are
``exp(lambda_j t) w_j(z)`` with

    w_j(z) = cos(omega_j z / h) - omega_j sin(omega_j z / h),   lambda_j = -alpha omega_j^2

and ``omega_j`` the roots of ``F(w) = (w^2 - 1) sin(w/h) - 2 w cos(w/h)``.  The
``w_j`` are not orthogonal, so the coefficients of the initial data come from
the Gram system ``G c = U``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .grid import GridFunction
from .models import DeltaInitial

DEFAULT_J = 40
RESIDUAL_TOL = 1e-12


class SpectralError(RuntimeError):
    pass


def frequency_residual(omega, h):
    """``F(omega) = (omega^2 - 1) sin(omega/h) - 2 omega cos(omega/h)``."""
    omega = np.asarray(omega, dtype=float)
    x = omega / h
    return (omega * omega - 1.0) * np.sin(x) - 2.0 * omega * np.cos(x)


def _dF(omega, h):
    x = omega / h
    s, c = np.sin(x), np.cos(x)
    return 2 * omega * s + (omega * omega - 1) * c / h - 2 * c + 2 * omega * s / h


def brackets(h, count):
    """Root brackets ``((2j-1) h pi/2, (2j+1) h pi/2)`` for ``j = 1..count``.

    The bracket containing ``omega = 1`` is split there: it holds two roots,
    one on each side, because ``2w / (w^2 - 1)`` jumps from -inf to +inf.
    Returns arrays ``lo, hi, j``.
    """
    j = np.arange(1, count + 1)
    lo = (2 * j - 1) * h * np.pi / 2
    hi = (2 * j + 1) * h * np.pi / 2
    split = np.flatnonzero((lo < 1.0) & (hi > 1.0))
    if split.size:
        s = split[0]
        lo = np.insert(lo, s + 1, 1.0)
        hi = np.insert(hi, s, 1.0)
        j = np.insert(j, s, j[s])
    return lo, hi, j


def find_eigenfrequencies(h, J):
    """The ``J`` smallest nonnegative roots of ``F``; ``omega_0 = 0`` exactly.

    Each positive root is bracketed and refined by Newton steps that fall back
    to bisection whenever Newton would leave the bracket.
    """
    if J < 1:
        raise ValueError("J must be at least 1")
    if not 0 < h < 1:
        raise ValueError("h must lie in (0, 1)")
    if J == 1:
        return np.zeros(1)
    lo, hi, jj = brackets(h, J - 1)
    lo, hi, jj = lo[: J - 1], hi[: J - 1], jj[: J - 1]
    f_lo = frequency_residual(lo, h)
    f_hi = frequency_residual(hi, h)
    bad = np.flatnonzero(np.sign(f_lo) * np.sign(f_hi) > 0)
    if bad.size:
        raise SpectralError(f"no sign change of F in the bracket for j={int(jj[bad[0]])}")
    lo, hi = lo.copy(), hi.copy()
    x = 0.5 * (lo + hi)
    tol = RESIDUAL_TOL * (1 + x * x)
    for _ in range(200):
        f = frequency_residual(x, h)
        done = np.abs(f) <= 0.25 * tol
        if done.all():
            break
        # keep the sign change inside [lo, hi]
        left = np.sign(f) == np.sign(f_lo)
        lo = np.where(left & ~done, x, lo)
        f_lo = np.where(left & ~done, f, f_lo)
        hi = np.where(~left & ~done, x, hi)
        step = x - f / _dF(x, h)
        ok = np.isfinite(step) & (step > lo) & (step < hi)
        x_new = np.where(ok, step, 0.5 * (lo + hi))
        stalled = (hi - lo) <= 4 * np.spacing(hi)
        x = np.where(done | stalled, x, x_new)
        tol = RESIDUAL_TOL * (1 + x * x)
        if np.all(done | stalled):
            break
    return np.concatenate([[0.0], x])


def eigenfunction(omega, h, z):
    """``cos(omega z / h) - omega sin(omega z / h)``; shape ``omega.shape + z.shape``."""
    omega = np.asarray(omega, dtype=float)
    z = np.asarray(z, dtype=float)
    om = omega.reshape(omega.shape + (1,) * z.ndim)
    arg = om * z / h
    return np.cos(arg) - om * np.sin(arg)


def eigen_sum(weights, omegas, h, z):
    """``sum_j weights_j w_j(z)`` for a vector of points ``z``.

    On uniform grids the phases ``exp(i omega z / h)`` are advanced by one
    complex rotation per node instead of fresh trig calls; rounding then grows
    like ``k * eps`` along the grid.
    """
    z = np.asarray(z, dtype=float)
    weights = np.asarray(weights, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    if z.ndim != 1 or z.size < 3:
        return weights @ eigenfunction(omegas, h, z)
    dz = (z[-1] - z[0]) / (z.size - 1)
    if not np.allclose(np.diff(z), dz, rtol=1e-12, atol=1e-15):
        return weights @ eigenfunction(omegas, h, z)
    p = omegas / h
    step = np.exp(1j * p * dz)
    phase = np.empty((omegas.size, z.size), dtype=complex)
    phase[:, 0] = np.exp(1j * p * z[0])
    phase[:, 1:] = step[:, None]
    np.cumprod(phase, axis=1, out=phase)
    # w_j = Re[(1 + i omega_j) exp(i p_j z)]
    return ((weights * (1.0 + 1j * omegas)) @ phase).real


def _sinc(x):
    # integral_0^1 cos(x z) dz
    return np.sinc(x / np.pi)


def _versin(x):
    # integral_0^1 sin(x z) dz = (1 - cos x) / x, written without cancellation
    out = np.zeros_like(x)
    nz = x != 0
    out[nz] = 2.0 * np.sin(0.5 * x[nz]) ** 2 / x[nz]
    return out


def gram_matrix(h, omegas):
    """``G_kl = int_0^1 w_k w_l dz`` from product-to-sum antiderivatives."""
    omegas = np.asarray(omegas, dtype=float)
    if np.unique(omegas).size != omegas.size:
        raise SpectralError("duplicate eigenfrequencies")
    p = omegas / h
    P, Q = np.meshgrid(p, p, indexing="ij")
    Wk, Wl = np.meshgrid(omegas, omegas, indexing="ij")
    s_minus, s_plus = _sinc(P - Q), _sinc(P + Q)   # coincident frequencies: sinc(0) = 1
    cc = 0.5 * (s_minus + s_plus)
    ss = 0.5 * (s_minus - s_plus)
    cs = 0.5 * (_versin(Q + P) + _versin(Q - P))   # int cos(p z) sin(q z)
    sc = 0.5 * (_versin(P + Q) + _versin(P - Q))   # int sin(p z) cos(q z)
    G = cc - Wl * cs - Wk * sc + Wk * Wl * ss
    return 0.5 * (G + G.T)


def simpson(fvals, a, b):
    """Composite Simpson rule on an even number of intervals (last axis)."""
    n = fvals.shape[-1] - 1
    if n % 2:
        raise ValueError("Simpson needs an even number of intervals")
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return (fvals @ w) * (b - a) / (3 * n)


def load_vector(h, omegas, u0, tol=1e-10, n_start=256, n_max=2**22):
    """``U_j = <w_j, u0>`` on [0, 1].

    ``u0`` is a callable, a ``GridFunction`` on [0, 1], or a ``DeltaInitial``
    (point mass of weight ``mass * h`` at ``z0``).
    """
    omegas = np.asarray(omegas, dtype=float)
    if isinstance(u0, DeltaInitial):
        return u0.mass * u0.h * eigenfunction(omegas, h, u0.z0)
    if isinstance(u0, GridFunction):
        if u0.z_min != 0.0 or u0.z_max != 1.0 or u0.M % 2:
            raise ValueError("grid initial data must cover [0, 1] with an even number of cells")
        return simpson(eigenfunction(omegas, h, u0.z) * u0.values, 0.0, 1.0)
    n = n_start
    prev = None
    while n <= n_max:
        z = np.linspace(0.0, 1.0, n + 1)
        cur = simpson(eigenfunction(omegas, h, z) * u0(z), 0.0, 1.0)
        if prev is not None and np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur
        n *= 2
    raise SpectralError("Simpson refinement did not settle")


def gram_and_load(h, omegas, u0):
    """The Gram matrix and load vector of the projection ``G c = U``."""
    return gram_matrix(h, omegas), load_vector(h, omegas, u0)


@dataclass(frozen=True)
class SpectralModel:
    h: float
    alpha_rate: float
    omegas: np.ndarray
    lambdas: np.ndarray
    gram: np.ndarray
    coeffs: np.ndarray

    def evaluate(self, t, z):
        """``sum_j c_j exp(lambda_j t) w_j(z)``."""
        amp = self.coeffs * np.exp(self.lambdas * t)
        return eigen_sum(amp, self.omegas, self.h, z)

    def eigen_residuals(self, z):
        """Max defects of the interior equation and the two boundary conditions.

        The interior check uses the exact second derivative of each ``w_j``.
        """
        om, h, a = self.omegas[:, None], self.h, self.alpha_rate
        arg = om * np.asarray(z)[None, :] / h
        w = np.cos(arg) - om * np.sin(arg)
        w2 = -(om / h) ** 2 * w
        interior = np.max(np.abs(self.lambdas[:, None] * w - a * h * h * w2), axis=1)
        w0, dw0 = 1.0, -self.omegas ** 2 / h
        x1 = self.omegas / h
        w1 = np.cos(x1) - self.omegas * np.sin(x1)
        dw1 = -(self.omegas / h) * (np.sin(x1) + self.omegas * np.cos(x1))
        left = np.abs(self.lambdas * w0 - a * h * dw0)
        right = np.abs(self.lambdas * w1 + a * h * dw1)
        return interior, left, right


def build_spectral(h, alpha_rate, J, u0):
    """Frequencies, Gram matrix and coefficients for initial data ``u0``."""
    omegas = find_eigenfrequencies(h, J)
    G, U = gram_and_load(h, omegas, u0)
    try:
        factor = linalg.cho_factor(G, lower=True, check_finite=True)
    except linalg.LinAlgError:
        cond = np.linalg.cond(G)
        raise SpectralError(f"Gram matrix is not positive definite (condition ~ {cond:.3e})") from None
    coeffs = linalg.cho_solve(factor, U)
    return SpectralModel(h=h, alpha_rate=alpha_rate, omegas=omegas,
                         lambdas=-alpha_rate * omegas ** 2, gram=G, coeffs=coeffs)


def solve_spectral(h, alpha_rate, J, u0, t, z=None):
    """Spectral solution at time ``t`` on ``z`` (default: the points ``k h``)."""
    if z is None:
        N = int(round(1.0 / h))
        z = np.arange(N + 1) / N
    z = np.asarray(z, dtype=float)
    model = build_spectral(h, alpha_rate, J, u0)
    return GridFunction(float(z[0]), float(z[-1]), model.evaluate(t, z), float(t))
