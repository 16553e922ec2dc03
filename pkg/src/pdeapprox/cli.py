"""Command line front end.

Subcommands: ``solve``, ``converge``, ``figure1``, ``bench``.  Every run writes
CSV (17 significant digits) plus a ``key=value`` manifest next to it.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
import argparse
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__, harness, pde_dynamic, pde_robin, spectral
from ._backend import BACKEND
from .coeffs import CoefficientError, build_matrix
from .harness import GridMismatchError, Settings, sup_error
from .models import MODEL_NAMES, SMOOTH_NAMES, ModelSpec, delta_initial, smooth_initial
from .ode import IntegrationError, integrate, expm_oracle, EXPM_MAX_STATES

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


NUMERIC_ERRORS = (IntegrationError, pde_dynamic.NonParabolicError, spectral.SpectralError,
                  CoefficientError, np.linalg.LinAlgError)


def _fmt(x):
    return "" if x is None else format(float(x), ".17g")


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) if not isinstance(v, str) else v for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(path, config, extra):
    items = dict(config)
    items.update(extra)
    items.setdefault("version", __version__)
    items.setdefault("backend", BACKEND)
    text = "".join(f"{k}={'' if v is None else v}\n" for k, v in items.items())
    _atomic_write(path, text)


def _parse_init(text):
    if text.startswith("delta:"):
        try:
            return "delta", int(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad delta initial {text!r}; use delta:K") from None
    if text not in SMOOTH_NAMES:
        raise ConfigError(f"unknown --init {text!r}; use one of {SMOOTH_NAMES} or delta:K")
    return text, None


def _model(args):
    try:
        return ModelSpec(args.model, args.tau, args.gamma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _check_N(N):
    if N < 2:
        raise ConfigError("N must be at least 2")


def _initial(kind, k0, N):
    """(ODE vector, PDE data) for the requested initial condition."""
    if kind == "delta":
        if not 0 <= k0 <= N:
            raise ConfigError(f"delta state {k0} outside 0..{N}")
        v, delta = delta_initial(k0, N)
        return v, delta
    u0, v = smooth_initial(kind, N)
    return v, u0


def cmd_solve(args):
    model = _model(args)
    N = args.N
    _check_N(N)
    kind, k0 = _parse_init(args.init)
    v, data = _initial(kind, k0, N)
    fld = model.field(N)
    z = np.arange(N + 1) / N
    u_pde = None
    if args.method == "dynamic":
        M = args.M or pde_dynamic.DEFAULT_REFINE * N
        u0 = data.mollified() if kind == "delta" else data
        sol = pde_dynamic.solve_dynamic(pde_dynamic.assemble_dynamic(fld), u0, args.t, M=M,
                                        rel_tol=args.rtol, abs_tol=args.atol,
                                        clamp_diffusion=args.clamp_diffusion)
        u_pde = sol.values[[sol.node_index(zk) for zk in z]]
    elif args.method == "robin":
        M = args.M or pde_robin.DEFAULT_REFINE * N
        u0 = data.mollified() if kind == "delta" else data
        try:
            pde_robin.robin_nodes(N, M)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        sol = pde_robin.solve_robin(pde_robin.assemble_robin(fld), u0, args.t, M=M,
                                    rel_tol=args.rtol, abs_tol=args.atol,
                                    clamp_diffusion=args.clamp_diffusion)
        u_pde = sol.values[[sol.node_index(zk) for zk in z]]
    elif args.method == "spectral":
        if not model.symmetric_voter:
            raise ConfigError("method spectral needs --model voter with tau == gamma")
        u_pde = spectral.solve_spectral(1.0 / N, model.alpha_rate, args.J, data, args.t, z).values
    x = None
    if args.with_ode or args.method == "ode":
        sys_ = build_matrix(fld)
        x = integrate(sys_, v, args.t, rel_tol=args.rtol, abs_tol=args.atol).values
    rows = []
    for k in range(N + 1):
        up = None if u_pde is None else u_pde[k]
        xo = None if x is None else x[k]
        err = None if (up is None or xo is None) else abs(up - xo)
        rows.append((z[k], up, xo, err))
    write_csv(args.out, ("z", "u_pde", "x_ode", "abs_err"), rows)
    extra = {}
    if u_pde is not None and x is not None:
        extra["sup_error"] = _fmt(np.max(np.abs(u_pde - x)))
    return extra


def _parse_Ns(text):
    try:
        Ns = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad --Ns {text!r}") from None
    if len(Ns) < 2:
        raise ConfigError("--Ns needs at least two sizes forming a pair (N, 2N)")
    if not any(2 * n in Ns for n in Ns):
        raise ConfigError("--Ns must contain at least one pair (N, 2N)")
    return Ns


def cmd_converge(args):
    model = _model(args)
    Ns = _parse_Ns(args.Ns)
    if args.method == "spectral" and not model.symmetric_voter:
        raise ConfigError("method spectral needs --model voter with tau == gamma")
    settings = Settings(rel_tol=args.rtol, abs_tol=args.atol, J=args.J, init=args.init)
    if args.init not in SMOOTH_NAMES:
        raise ConfigError("convergence studies need smooth initial data")
    if args.M_factor:
        settings.refine_dynamic = settings.refine_robin = args.M_factor
    estimates = harness.convergence_study(model, args.method, Ns, args.t, settings)
    errors = {}
    orders = {}
    for e in estimates:
        errors[e.N_pair[0]] = e.errors[0].sup_error
        errors[e.N_pair[1]] = e.errors[1].sup_error
        orders[e.N_pair[0]] = e.observed_order
    rows = [(n, errors.get(n), orders.get(n)) for n in Ns]
    write_csv(args.out, ("N", "sup_error", "observed_order"), rows)
    med = harness.median_order(estimates)
    for e in estimates:
        tag = "excluded: " + e.reason if e.excluded else f"order {e.observed_order:.4f}"
        print(f"N={e.N_pair[0]}->{e.N_pair[1]}: {tag}")
    print(f"median order: {med}")
    return {"median_order": _fmt(med)}


def cmd_figure1(args):
    model = _model(args)
    if not model.symmetric_voter:
        raise ConfigError("figure1 needs the symmetric voter model")
    N = args.N
    _check_N(N)
    kind, k0 = _parse_init(args.init)
    if kind != "delta":
        raise ConfigError("figure1 uses delta initial data (delta:K)")
    v, delta = _initial(kind, k0, N)
    z = np.arange(N + 1) / N
    t0 = time.perf_counter()
    sys_ = build_matrix(model.field(N))
    if sys_.n_states <= EXPM_MAX_STATES and args.reference == "expm":
        x = expm_oracle(sys_, v, args.t).values
    else:
        x = integrate(sys_, v, args.t, rel_tol=args.rtol, abs_tol=args.atol).values
    ode_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    u = spectral.solve_spectral(1.0 / N, model.alpha_rate, args.J, delta, args.t, z).values
    spec_s = time.perf_counter() - t0
    base, _ = os.path.splitext(args.out)
    write_csv(base + "_ode.csv", ("z", "x_ode"), zip(z, x))
    write_csv(base + "_spectral.csv", ("z", "u_pde"), zip(z, u))
    diff = float(np.max(np.abs(u - x)))
    print(f"sup_difference={_fmt(diff)}")
    print(f"relative_to_peak={_fmt(diff / np.max(x))}")
    print(f"ode_seconds={_fmt(ode_s)}")
    print(f"spectral_seconds={_fmt(spec_s)}")
    return {"sup_difference": _fmt(diff), "ode_peak": _fmt(np.max(x)),
            "ode_seconds": _fmt(ode_s), "spectral_seconds": _fmt(spec_s)}


def cmd_bench(args):
    model = _model(args)
    if not model.symmetric_voter:
        raise ConfigError("bench needs the symmetric voter model")
    _check_N(args.N)
    r = harness.benchmark(model, args.N, args.t, J=args.J, repeats=args.repeats,
                          rel_tol=args.rtol, abs_tol=args.atol)
    report = {
        "N": r.N, "t": _fmt(r.t), "J": r.J,
        "ode_seconds": _fmt(r.ode_seconds), "spectral_seconds": _fmt(r.spectral_seconds),
        "speedup": _fmt(r.speedup), "sup_difference": _fmt(r.sup_difference),
        "ode_peak": _fmt(r.ode_peak), "backend": BACKEND,
    }
    text = "".join(f"{k}={v}\n" for k, v in report.items())
    sys.stdout.write(text)
    if args.out:
        _atomic_write(args.out, text)
    return report


def _common(p, method_choices=None, defaults=None):
    d = {"model": "voter", "tau": 0.5, "gamma": 0.5, "N": 100, "t": 1.0, "J": spectral.DEFAULT_J,
         "init": "sin2", "rtol": 1e-10, "atol": 1e-13}
    d.update(defaults or {})
    p.add_argument("--config", help="JSON file with option values (unknown keys are rejected)")
    p.add_argument("--model", choices=MODEL_NAMES, default=d["model"])
    p.add_argument("--tau", type=float, default=d["tau"])
    p.add_argument("--gamma", type=float, default=d["gamma"])
    p.add_argument("--N", type=int, default=d["N"])
    p.add_argument("--t", type=float, default=d["t"], help="final time")
    p.add_argument("--J", type=int, default=d["J"], help="number of eigenfunctions")
    p.add_argument("--init", default=d["init"], help=f"{'|'.join(SMOOTH_NAMES)} or delta:K")
    p.add_argument("--rtol", type=float, default=d["rtol"])
    p.add_argument("--atol", type=float, default=d["atol"])
    p.add_argument("--seed", type=int, default=0)
    if method_choices:
        p.add_argument("--method", choices=method_choices, default=method_choices[0])


def build_parser():
    parser = argparse.ArgumentParser(prog="pdeapprox", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one model with one method, compare with the ODE")
    _common(p, ("dynamic", "robin", "spectral", "ode"))
    p.add_argument("--M", type=int, default=None, help="solver cells per unit length")
    p.add_argument("--clamp-diffusion", action="store_true",
                   help="clamp negative diffusion to zero instead of failing")
    p.add_argument("--no-ode", dest="with_ode", action="store_false",
                   help="leave the x_ode and abs_err columns empty")
    p.add_argument("--out", default="solution.csv")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="empirical convergence order against the ODE")
    _common(p, harness.METHODS)
    p.add_argument("--Ns", default="25,50,100,200")
    p.add_argument("--M-factor", dest="M_factor", type=int, default=None,
                   help="solver cells per coarse cell")
    p.add_argument("--out", default="convergence.csv")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("figure1", help="ODE distribution versus spectral PDE from a point mass")
    _common(p, defaults={"N": 1000, "t": 500.0, "init": "delta:199"})
    p.add_argument("--reference", choices=("expm", "integrate"), default="integrate")
    p.add_argument("--out", default="figure1.csv", help="prefix; writes *_ode.csv and *_spectral.csv")
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("bench", help="time the ODE solve against the spectral solve")
    _common(p, defaults={"N": 1000, "t": 100.0, "init": "delta:199"})
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def _apply_config(parser, args, argv):
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    known = set(vars(args)) - {"func", "command", "config"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    # command-line flags win over the file
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for k, v in cfg.items():
        if k not in explicit:
            setattr(args, k, v)
    return args


def _validate(args):
    for name in ("tau", "gamma"):
        if getattr(args, name) < 0:
            raise ConfigError(f"--{name} must be nonnegative")
    if args.t < 0:
        raise ConfigError("--t must be nonnegative")
    if args.rtol <= 0 or args.atol <= 0:
        raise ConfigError("tolerances must be positive")
    if args.J < 1:
        raise ConfigError("--J must be positive")
    M = getattr(args, "M", None)
    if M is not None and M < 4 * args.N:
        raise ConfigError("--M must be at least 4N")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        args = _apply_config(parser, args, argv)
        _validate(args)
        extra = args.func(args) or {}
    except ConfigError as exc:
        print(f"pdeapprox: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridMismatchError, ValueError) as exc:
        if isinstance(exc, NUMERIC_ERRORS):
            print(f"pdeapprox: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"pdeapprox: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"pdeapprox: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = getattr(args, "out", None)
    if out:
        config = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
        extra = dict(extra)
        extra["wall_seconds"] = _fmt(time.perf_counter() - started)
        write_manifest(out + ".manifest", config, extra)
    return 0
