"""The voter (cycle graph) and SIS (complete graph) chains, and initial data."""
from dataclasses import dataclass

import numpy as np

from .coeffs import CoefficientField
from .ode import StateVector


@dataclass(frozen=True)
class VoterParams:
    tau: float
    gamma: float
    N: int

    def __post_init__(self):
        _check_rates(self.tau, self.gamma, self.N)


@dataclass(frozen=True)
class SisParams:
    tau: float
    gamma: float
    N: int

    def __post_init__(self):
        _check_rates(self.tau, self.gamma, self.N)


def _check_rates(tau, gamma, N):
    if not (np.isfinite(tau) and np.isfinite(gamma)):
        raise ValueError("rates tau and gamma must be finite")
    if tau < 0 or gamma < 0:
        raise ValueError("rates tau and gamma must be nonnegative")
    if tau + gamma <= 0:
        raise ValueError("tau + gamma must be positive")
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")


def voter_field(p):
    """Constant rates 2*tau up, 2*gamma down, reflecting ends.

    ``b`` takes its interior value on the open interval (0, 1) and the end
    values ``-2 tau`` / ``-2 gamma`` at z <= 0 / z >= 1, so the reaction term
    of the approximating PDE vanishes on all of (0, 1).
    """
    tau, gamma = float(p.tau), float(p.gamma)
    up, down = 2.0 * tau, 2.0 * gamma

    def a(z):
        return np.full(np.shape(z), up)

    def c(z):
        return np.full(np.shape(z), down)

    def b(z):
        z = np.asarray(z, dtype=float)
        return np.where(z <= 0.0, -up, np.where(z >= 1.0, -down, -(up + down)))

    return CoefficientField(a, b, c, p.N, stochastic=True, name="voter")


def sis_field(p):
    """a(z) = N^2 tau z (1 - z), c(z) = N gamma z, b = -a - c."""
    tau, gamma, N = float(p.tau), float(p.gamma), p.N

    def a(z):
        z = np.asarray(z, dtype=float)
        return N * N * tau * z * (1.0 - z)

    def c(z):
        return N * gamma * np.asarray(z, dtype=float)

    def b(z):
        return -a(z) - c(z)

    return CoefficientField(a, b, c, N, stochastic=True, name="sis")


@dataclass(frozen=True)
class DeltaInitial:
    """Unit probability mass at state ``k0``, i.e. at ``z0 = k0 / N``.

    As PDE data the mass is spread over one grid cell, so the density has
    integral ``mass * h`` and ``u(z) ~ x_k`` at the grid points.
    """

    k0: int
    N: int
    mass: float = 1.0

    @property
    def z0(self):
        return self.k0 / self.N

    @property
    def h(self):
        return 1.0 / self.N

    def width(self):
        return 2.0 / self.N

    def mollified(self, sigma=None):
        """Gaussian profile of standard deviation ``sigma`` (default 2/N).

        Normalised so that its samples at ``k/N`` sum to ``mass``.
        """
        sigma = self.width() if sigma is None else sigma
        k = np.arange(self.N + 1)
        norm = np.sum(np.exp(-0.5 * ((k / self.N - self.z0) / sigma) ** 2))
        z0, mass = self.z0, self.mass

        def u0(z):
            z = np.asarray(z, dtype=float)
            return mass * np.exp(-0.5 * ((z - z0) / sigma) ** 2) / norm

        return u0


def delta_initial(k0, N):
    """Point mass at state ``k0``: the ODE vector and the PDE-side descriptor."""
    if int(k0) != k0 or not 0 <= k0 <= N:
        raise IndexError(f"state index {k0!r} outside 0..{N}")
    v = np.zeros(N + 1)
    v[int(k0)] = 1.0
    return StateVector(v), DeltaInitial(int(k0), int(N))


_SMOOTH = {
    "sin2": lambda z: np.sin(np.pi * z) ** 2,
    "gaussian": lambda z: np.exp(-50.0 * (z - 0.3) ** 2),
    "poly": lambda z: z * z * (1.0 - z) ** 2,
}


def smooth_initial(name, N):
    """A C-infinity profile on [0, 1] and its sampling at ``k/N``."""
    try:
        profile = _SMOOTH[name]
    except KeyError:
        raise ValueError(f"unknown initial profile {name!r}; choose from {sorted(_SMOOTH)}") from None

    def u0(z):
        return profile(np.asarray(z, dtype=float))

    return u0, StateVector(u0(np.arange(N + 1) / N))


SMOOTH_NAMES = tuple(_SMOOTH)


@dataclass(frozen=True)
class ModelSpec:
    """A named model family; ``field(N)`` builds the coefficients at size N."""

    name: str
    tau: float = 0.5
    gamma: float = 0.5

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.name!r}; choose from {MODEL_NAMES}")
        _check_rates(self.tau, self.gamma, 2)

    def field(self, N):
        if self.name == "voter":
            return voter_field(VoterParams(self.tau, self.gamma, N))
        return sis_field(SisParams(self.tau, self.gamma, N))

    @property
    def symmetric_voter(self):
        return self.name == "voter" and self.tau == self.gamma

    @property
    def alpha_rate(self):
        """Diffusion rate of the symmetric voter PDE, ``tau + gamma``."""
        if not self.symmetric_voter:
            raise ValueError("the spectral solver needs the symmetric voter model (tau == gamma)")
        return self.tau + self.gamma


MODEL_NAMES = ("voter", "sis")
