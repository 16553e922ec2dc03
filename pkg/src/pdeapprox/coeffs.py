"""Coefficient fields a, b, c and the tridiagonal generator they define."""
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

STOCHASTIC_RTOL = 1e-12


class CoefficientError(ValueError):
    """A coefficient could not be evaluated where it is needed."""


def _evaluate(fn, z, name):
    z = np.asarray(z, dtype=float)
    try:
        with np.errstate(all="raise", under="ignore"):
            out = np.broadcast_to(np.asarray(fn(z), dtype=float), z.shape).copy()
    except Exception:
        out = None
    if out is not None and np.all(np.isfinite(out)):
        return out
    # pinpoint the first bad point
    for zi in np.atleast_1d(z):
        try:
            v = float(fn(float(zi)))
        except Exception as exc:
            raise CoefficientError(f"coefficient {name} failed at z={zi!r}: {exc}") from exc
        if not np.isfinite(v):
            raise CoefficientError(f"coefficient {name} is not finite at z={zi!r}")
    raise CoefficientError(f"coefficient {name} could not be evaluated on the grid")


@dataclass(frozen=True)
class CoefficientField:
    """Rate functions of the tridiagonal system on ``[-1/N, 1 + 1/N]``.

    ``a`` is the up-rate (sub-diagonal), ``c`` the down-rate (super-diagonal),
    ``b`` the diagonal.  Each is a callable of ``z``; numpy broadcasting is used
    when the callable supports it.
    """

    a: Callable
    b: Callable
    c: Callable
    N: int
    stochastic: bool = False
    name: str = dc_field(default="custom", compare=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        self._check_required_points()
        if self.stochastic:
            k = np.arange(self.N + 1)
            a_k = self.eval_a(k[:-1] / self.N)
            c_k = self.eval_c(k[1:] / self.N)
            if np.any(a_k < 0) or np.any(c_k < 0):
                raise CoefficientError("stochastic field needs a(k/N) >= 0 and c(k/N) >= 0")

    @property
    def h(self):
        return 1.0 / self.N

    def _check_required_points(self):
        h = self.h
        pts = np.concatenate([np.arange(self.N + 1) * h, [-h, 1 + h, -h / 2, 1 + h / 2]])
        for name in "abc":
            _evaluate(getattr(self, name), pts, name)

    def eval_a(self, z):
        return _evaluate(self.a, z, "a")

    def eval_b(self, z):
        return _evaluate(self.b, z, "b")

    def eval_c(self, z):
        return _evaluate(self.c, z, "c")

    @classmethod
    def from_samples(cls, a_k, b_k, c_k, stochastic=False, name="sampled"):
        """Field from samples at ``k/N``; linear interpolation, linear extrapolation."""
        a_k, b_k, c_k = (np.asarray(v, dtype=float) for v in (a_k, b_k, c_k))
        if not (a_k.shape == b_k.shape == c_k.shape) or a_k.ndim != 1 or a_k.size < 2:
            raise ValueError("samples must be equal-length vectors of length N + 1 >= 2")
        N = a_k.size - 1
        return cls(_interpolant(a_k), _interpolant(b_k), _interpolant(c_k), N,
                   stochastic=stochastic, name=name)


def _interpolant(samples):
    N = samples.size - 1
    grid = np.arange(N + 1) / N
    left_slope = (samples[1] - samples[0]) * N
    right_slope = (samples[-1] - samples[-2]) * N

    def fn(z):
        z = np.asarray(z, dtype=float)
        out = np.interp(z, grid, samples)
        out = np.where(z < 0, samples[0] + left_slope * z, out)
        return np.where(z > 1, samples[-1] + right_slope * (z - 1), out)

    return fn


@dataclass(frozen=True)
class TridiagonalSystem:
    """The (N+1)x(N+1) generator in band form.

    ``sub[k] = A[k+1, k] = a_k``, ``diag[k] = A[k, k] = b_k``,
    ``sup[k-1] = A[k-1, k] = c_k``.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    stochastic: bool

    def __post_init__(self):
        for arr in (self.sub, self.diag, self.sup):
            arr.setflags(write=False)
        n = self.diag.size
        if self.sub.size != n - 1 or self.sup.size != n - 1:
            raise ValueError("band lengths must be N, N+1, N")

    @property
    def n_states(self):
        return self.diag.size

    @property
    def N(self):
        return self.diag.size - 1

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def banded(self):
        """LAPACK band storage (kl = ku = 1) as a C-contiguous array."""
        n = self.n_states
        ab = np.zeros((3, n))
        ab[0, 1:] = self.sup
        ab[1] = self.diag
        ab[2, :-1] = self.sub
        return ab

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y

    def max_abs_entry(self):
        return max(np.max(np.abs(self.diag)),
                   np.max(np.abs(self.sub), initial=0.0),
                   np.max(np.abs(self.sup), initial=0.0))

    @classmethod
    def from_bands(cls, sub, diag, sup):
        """Build from raw bands; the stochastic flag is inferred."""
        sub, diag, sup = (np.array(v, dtype=float) for v in (sub, diag, sup))
        return cls(sub, diag, sup, _is_stochastic(sub, diag, sup))


def _column_sums(sub, diag, sup):
    s = diag.copy()
    s[:-1] += sub
    s[1:] += sup
    return s


def _is_stochastic(sub, diag, sup):
    scale = max(np.max(np.abs(diag)), np.max(np.abs(sub), initial=0.0),
                np.max(np.abs(sup), initial=0.0))
    dev = np.max(np.abs(_column_sums(sub, diag, sup)))
    return bool(dev <= STOCHASTIC_RTOL * scale and np.all(sub >= 0) and np.all(sup >= 0))


def build_matrix(field):
    """Sample ``field`` on ``k/N`` and assemble the tridiagonal generator."""
    N = field.N
    k = np.arange(N + 1)
    sub = field.eval_a(k[:-1] / N)
    diag = field.eval_b(k / N)
    sup = field.eval_c(k[1:] / N)
    return TridiagonalSystem(sub, diag, sup, _is_stochastic(sub, diag, sup))


def check_column_sums(sys):
    """Largest absolute column sum of ``sys``."""
    return float(np.max(np.abs(_column_sums(sys.sub, sys.diag, sys.sup))))
