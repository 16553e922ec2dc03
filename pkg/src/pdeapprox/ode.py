"""Time integration of x' = A x and two independent references.

``integrate`` is the workhorse (adaptive Dormand-Prince 5(4) on band storage),
``expm_oracle`` a dense matrix exponential and ``gillespie`` a Monte-Carlo
simulation of the birth-death chain whose master equation is ``x' = A x``.
"""
from dataclasses import dataclass

import numpy as np

from ._backend import kernels

DEFAULT_MAX_STEPS = 10**8
EXPM_MAX_STATES = 2000


class IntegrationError(RuntimeError):
    """The adaptive integrator gave up."""

    def __init__(self, message, t_fail):
        super().__init__(message)
        self.t_fail = t_fail


@dataclass(frozen=True)
class StateVector:
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("state vector must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise ValueError("state vector has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class EmpiricalDistribution:
    counts: np.ndarray
    samples: int
    time: float

    def __post_init__(self):
        if self.samples < 1 or int(np.sum(self.counts)) != self.samples:
            raise ValueError("counts must sum to samples >= 1")

    @property
    def frequencies(self):
        return self.counts / self.samples


def integrate_banded(ab, kl, ku, y0, t_final, rel_tol, abs_tol, max_steps=DEFAULT_MAX_STEPS):
    """Adaptive DP5(4) for ``y' = A y`` with ``A`` in band storage; returns ``y(t_final)``."""
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    ab = np.ascontiguousarray(ab, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    y, status, t, n_acc, n_rej = kernels.dopri54_band(
        ab, int(kl), int(ku), y0, float(t_final), float(rel_tol), float(abs_tol), int(max_steps))
    if status == 1:
        raise IntegrationError(f"step size underflow at t={t:.6g} (stiff system?)", t)
    if status == 2:
        raise IntegrationError(f"non-finite values at t={t:.6g}", t)
    if status == 3:
        raise IntegrationError(
            f"step limit {max_steps} reached at t={t:.6g} after {n_acc} accepted, "
            f"{n_rej} rejected steps", t)
    return np.asarray(y)


def integrate(sys, v, t_final, rel_tol=1e-9, abs_tol=1e-12, max_steps=DEFAULT_MAX_STEPS):
    """Solve ``x' = A_N x, x(0) = v`` up to ``t_final``."""
    if not isinstance(v, StateVector):
        v = StateVector(v)
    if len(v) != sys.n_states:
        raise ValueError(f"state has {len(v)} entries, system has {sys.n_states} states")
    y = integrate_banded(sys.banded(), 1, 1, v.values, t_final, rel_tol, abs_tol, max_steps)
    return StateVector(y, v.time + t_final)


def _expm_dense(M):
    """exp(M) by scaling and squaring with a degree-18 Taylor polynomial."""
    norm = np.max(np.sum(np.abs(M), axis=0))
    s = 0 if norm <= 0.5 else int(np.ceil(np.log2(norm / 0.5)))
    X = M / 2.0**s
    n = M.shape[0]
    # Horner form of sum_{k<=18} X^k / k!
    E = np.eye(n)
    for k in range(18, 0, -1):
        E = np.eye(n) + (X @ E) / k
    for _ in range(s):
        E = E @ E
    return E


def expm_oracle(sys, v, t):
    """``exp(t A_N) v`` from a dense matrix exponential (reference only)."""
    if not isinstance(v, StateVector):
        v = StateVector(v)
    if sys.n_states > EXPM_MAX_STATES:
        raise ValueError(f"expm_oracle is limited to {EXPM_MAX_STATES} states, got {sys.n_states}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return StateVector(v.values.copy(), v.time)
    E = _expm_dense(t * sys.to_dense())
    return StateVector(E @ v.values, v.time + t)


def gillespie(sys, k0, t_final, n_samples, seed):
    """Exact stochastic simulation of the birth-death chain behind ``sys``.

    Up-rate from state k is ``a_k`` (sub-diagonal), down-rate ``c_k``
    (super-diagonal).  Trajectory streams are derived from ``(seed, index)``;
    see ``pdeapprox._fallback`` for the generator.
    """
    if not sys.stochastic:
        raise ValueError("gillespie needs a stochastic (zero column sum) system")
    if np.any(sys.sub < 0) or np.any(sys.sup < 0):
        raise ValueError("negative transition rate")
    N = sys.N
    if int(k0) != k0 or not 0 <= k0 <= N:
        raise IndexError(f"initial state {k0!r} outside 0..{N}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    up = np.zeros(N + 1)
    up[:-1] = sys.sub
    down = np.zeros(N + 1)
    down[1:] = sys.sup
    counts = kernels.gillespie_birth_death(up, down, int(k0), float(t_final), int(n_samples),
                                           int(seed) % 2**64)
    return EmpiricalDistribution(np.asarray(counts), int(n_samples), float(t_final))
