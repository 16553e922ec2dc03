"""PDE-versus-ODE error measurement, empirical orders and timing."""
import contextlib
import os
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import pde_dynamic, pde_robin, spectral
from .coeffs import build_matrix
from .models import ModelSpec, delta_initial, smooth_initial
from .ode import EXPM_MAX_STATES, expm_oracle, integrate

METHODS = ("dynamic", "robin", "spectral")


class GridMismatchError(ValueError):
    """The PDE grid does not contain the comparison points k/N."""


@dataclass(frozen=True)
class ErrorReport:
    N: int
    t: float
    sup_error: float
    method: str
    M: Optional[int] = None
    J: Optional[int] = None
    rel_tol: float = 0.0
    abs_tol: float = 0.0
    reference_scale: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.sup_error) or self.sup_error < 0:
            raise ValueError("sup_error must be finite and nonnegative")


@dataclass(frozen=True)
class OrderEstimate:
    method: str
    N_pair: tuple
    errors: tuple
    observed_order: Optional[float]
    excluded: bool = False
    reason: str = ""


@dataclass
class Settings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    refine_dynamic: int = pde_dynamic.DEFAULT_REFINE
    refine_robin: int = pde_robin.DEFAULT_REFINE
    J: int = spectral.DEFAULT_J
    init: str = "sin2"
    reference_rtol: float = 1e-10
    noise_factor: float = 10.0
    extra: dict = field(default_factory=dict)


def sup_error(u, x, N):
    """``max_k |u(k/N) - x_k|``; every ``k/N`` must be a node of ``u``."""
    xv = getattr(x, "values", x)
    if len(xv) != N + 1:
        raise ValueError(f"state vector has {len(xv)} entries, expected {N + 1}")
    idx = []
    for k in range(N + 1):
        j = u.node_index(k / N)
        if j is None:
            raise GridMismatchError(f"z={k}/{N} is not a node of the PDE grid; no interpolation is done")
        idx.append(j)
    return float(np.max(np.abs(u.values[idx] - xv)))


def ode_reference(sys, v, t, rel_tol=1e-10):
    """Dense exponential for small systems, the adaptive solver otherwise."""
    if sys.n_states <= EXPM_MAX_STATES:
        return expm_oracle(sys, v, t)
    return integrate(sys, v, t, rel_tol=rel_tol, abs_tol=rel_tol * 1e-3)


def solve_pde(model, method, N, t, u0, settings):
    """Run one PDE method and return the solution on a grid containing k/N."""
    fld = model.field(N)
    if method == "dynamic":
        problem = pde_dynamic.assemble_dynamic(fld)
        return pde_dynamic.solve_dynamic(problem, u0, t, M=settings.refine_dynamic * N,
                                         rel_tol=settings.rel_tol, abs_tol=settings.abs_tol)
    if method == "robin":
        problem = pde_robin.assemble_robin(fld)
        return pde_robin.solve_robin(problem, u0, t, M=settings.refine_robin * N,
                                     rel_tol=settings.rel_tol, abs_tol=settings.abs_tol)
    if method == "spectral":
        return spectral.solve_spectral(1.0 / N, model.alpha_rate, settings.J, u0, t)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def error_report(model, method, N, t, settings):
    """Sup-norm PDE-versus-ODE error for smooth initial data at size N."""
    u0, v = smooth_initial(settings.init, N)
    x = ode_reference(build_matrix(model.field(N)), v, t, settings.reference_rtol)
    u = solve_pde(model, method, N, t, u0, settings)
    refine = {"dynamic": settings.refine_dynamic, "robin": settings.refine_robin}.get(method)
    return ErrorReport(N=N, t=t, sup_error=sup_error(u, x, N), method=method,
                       M=None if refine is None else refine * N,
                       J=settings.J if method == "spectral" else None,
                       rel_tol=settings.rel_tol, abs_tol=settings.abs_tol,
                       reference_scale=float(np.max(np.abs(x.values))))


def convergence_study(model, method, N_list, t=1.0, settings=None):
    """Observed orders ``log2(err(N) / err(2N))`` for every doubling pair in ``N_list``."""
    settings = settings or Settings()
    N_list = [int(n) for n in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly increasing")
    pairs = [(n, 2 * n) for n in N_list if 2 * n in N_list]
    if not pairs:
        raise ValueError("N_list needs at least one pair (N, 2N)")
    reports = {n: error_report(model, method, n, t, settings) for n in N_list}
    out = []
    for n, m in pairs:
        ea, eb = reports[n], reports[m]
        floor = settings.noise_factor * max(settings.rel_tol * ea.reference_scale, settings.abs_tol)
        if ea.sup_error <= floor or eb.sup_error <= floor:
            out.append(OrderEstimate(method, (n, m), (ea, eb), None, excluded=True,
                                     reason=f"error below {settings.noise_factor:g}x solver tolerance"))
            continue
        out.append(OrderEstimate(method, (n, m), (ea, eb), float(np.log2(ea.sup_error / eb.sup_error))))
    return out


def median_order(estimates):
    orders = [e.observed_order for e in estimates if not e.excluded]
    return statistics.median(orders) if orders else None


@dataclass(frozen=True)
class BenchmarkResult:
    N: int
    t: float
    J: int
    ode_seconds: float
    spectral_seconds: float
    sup_difference: float
    ode_peak: float
    ode_rel_tol: float

    @property
    def speedup(self):
        return self.ode_seconds / self.spectral_seconds

    @property
    def relative_difference(self):
        return self.sup_difference / self.ode_peak


@contextlib.contextmanager
def _pinned():
    """Run on a single CPU where the OS allows it, so timings are comparable."""
    if not hasattr(os, "sched_getaffinity"):
        yield
        return
    old = os.sched_getaffinity(0)
    try:
        os.sched_setaffinity(0, {min(old)})
    except OSError:
        yield
        return
    try:
        yield
    finally:
        os.sched_setaffinity(0, old)


def _median_time(fn, repeats):
    fn()  # warm-up, not timed
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def benchmark(model, N, t, J=spectral.DEFAULT_J, k0=None, repeats=3, rel_tol=1e-10, abs_tol=1e-14):
    """Wall-clock the ODE pipeline and the spectral pipeline from a point mass.

    Each pipeline is timed from coefficients to values at ``k/N``, serially
    and pinned to one CPU.  ``k0``
    defaults to ``round(0.2 N) - 1`` (state 199 at N = 1000).
    """
    if not model.symmetric_voter:
        raise ValueError("benchmark needs the symmetric voter model")
    if k0 is None:
        k0 = max(int(round(0.2 * N)) - 1, 0)
    v, delta = delta_initial(k0, N)
    z = np.arange(N + 1) / N

    def run_ode():
        return integrate(build_matrix(model.field(N)), v, t, rel_tol=rel_tol, abs_tol=abs_tol).values

    def run_spectral():
        return spectral.solve_spectral(1.0 / N, model.alpha_rate, J, delta, t, z).values

    with _pinned():
        ode_s, x = _median_time(run_ode, repeats)
        spec_s, u = _median_time(run_spectral, repeats)
    return BenchmarkResult(N=N, t=t, J=J, ode_seconds=ode_s, spectral_seconds=spec_s,
                           sup_difference=float(np.max(np.abs(u - x))),
                           ode_peak=float(np.max(x)), ode_rel_tol=rel_tol)


def voter(tau=0.5, gamma=0.5):
    return ModelSpec("voter", tau, gamma)
