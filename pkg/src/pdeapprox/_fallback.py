"""Pure numpy implementations of the compiled kernels.

Used when the Cython extension is not built, or when ``PDEAPPROX_BACKEND=python``.

Random streams
--------------
Trajectory ``m`` of a Gillespie run with seed ``s`` draws from its own
xoshiro256** generator.  The generator state is four consecutive splitmix64
outputs, where the splitmix64 counter starts at ``splitmix64(s) + m * 0x9E3779B97F4A7C15``
(mod 2**64).  Uniforms are ``(next >> 11) * 2**-53``.  Results therefore do not
depend on how trajectories are batched or parallelised.
"""
import numpy as np

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2
STATUS_MAX_STEPS = 3

_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_EPS = np.finfo(float).eps


def band_matvec(ab, kl, ku, x):
    """Return ``A @ x`` for ``A`` in LAPACK band storage ``ab[ku + i - j, j]``."""
    n = x.shape[0]
    y = np.zeros(n)
    for d in range(-kl, ku + 1):
        # entries A[i, i + d] live in row ku - d, column i + d
        row = ab[ku - d]
        if d >= 0:
            y[: n - d] += row[d:] * x[d:]
        else:
            y[-d:] += row[: n + d] * x[: n + d]
    return y


def _rms(v, scale):
    return float(np.sqrt(np.mean((v / scale) ** 2)))


def dopri54_band(ab, kl, ku, y0, t_final, rtol, atol, max_steps):
    """Integrate ``y' = A y`` from 0 to ``t_final`` with an adaptive DP5(4) pair.

    Returns ``(y, status, t_reached, n_accepted, n_rejected)``.
    """
    y = np.array(y0, dtype=np.float64)
    if t_final <= 0.0 or y.size == 0:
        return y, STATUS_OK, 0.0, 0, 0

    def f(v):
        return band_matvec(ab, kl, ku, v)

    k1 = f(y)
    scale = atol + rtol * np.abs(y)
    d0 = _rms(y, scale)
    d1 = _rms(k1, scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_final)
    d2 = _rms((f(y + h0 * k1) - k1) / h0, scale)
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100.0 * h0, h1, t_final)

    t = 0.0
    n_acc = n_rej = 0
    status = STATUS_OK
    a = _A
    while t < t_final:
        if n_acc + n_rej >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if h < 16.0 * _EPS * abs(t) or h <= 0.0:
            status = STATUS_UNDERFLOW
            break
        if t + h > t_final or t + 1.01 * h >= t_final:
            h = t_final - t

        k2 = f(y + h * (a[1][0] * k1))
        k3 = f(y + h * (a[2][0] * k1 + a[2][1] * k2))
        k4 = f(y + h * (a[3][0] * k1 + a[3][1] * k2 + a[3][2] * k3))
        k5 = f(y + h * (a[4][0] * k1 + a[4][1] * k2 + a[4][2] * k3 + a[4][3] * k4))
        k6 = f(y + h * (a[5][0] * k1 + a[5][1] * k2 + a[5][2] * k3
                        + a[5][3] * k4 + a[5][4] * k5))
        ynew = y + h * (_B[0] * k1 + _B[2] * k3 + _B[3] * k4 + _B[4] * k5 + _B[5] * k6)
        k7 = f(ynew)
        if not np.all(np.isfinite(ynew)):
            status = STATUS_NONFINITE
            break
        err = h * (_E[0] * k1 + _E[2] * k3 + _E[3] * k4 + _E[4] * k5
                   + _E[5] * k6 + _E[6] * k7)
        enorm = _rms(err, atol + rtol * np.maximum(np.abs(y), np.abs(ynew)))

        if enorm <= 1.0:
            t += h
            n_acc += 1
            y = ynew
            k1 = k7
            fac = _FAC_MAX if enorm == 0.0 else min(_FAC_MAX, max(_FAC_MIN, _SAFETY * enorm ** -0.2))
        else:
            n_rej += 1
            fac = min(1.0, max(_FAC_MIN, _SAFETY * enorm ** -0.2))
        h *= fac

    return y, status, t, n_acc, n_rej


_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _u64(v):
    return np.uint64(v)


def _mix(z):
    with np.errstate(over="ignore"):  # arithmetic is mod 2**64 by design
        z = (z ^ (z >> _u64(30))) * _MIX1
        z = (z ^ (z >> _u64(27))) * _MIX2
    return z ^ (z >> _u64(31))


def _rotl(x, k):
    return (x << _u64(k)) | (x >> _u64(64 - k))


class _Xoshiro:
    """Vectorised xoshiro256**: one independent stream per array slot."""

    def __init__(self, seed, indices):
        with np.errstate(over="ignore"):
            base = _mix(_u64(seed) + _GOLDEN)
            sm = base + np.asarray(indices, dtype=np.uint64) * _GOLDEN
            s = []
            for _ in range(4):
                sm = sm + _GOLDEN
                s.append(_mix(sm))
        self.s = np.stack(s)

    def uniform(self, mask=None):
        s = self.s if mask is None else self.s[:, mask]
        with np.errstate(over="ignore"):
            result = _rotl(s[1] * _u64(5), 7) * _u64(9)
            t = s[1] << _u64(17)
            s[2] ^= s[0]
            s[3] ^= s[1]
            s[1] ^= s[2]
            s[0] ^= s[3]
            s[2] ^= t
            s[3] = _rotl(s[3], 45)
        if mask is not None:
            self.s[:, mask] = s
        return (result >> _u64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def uniform_stream(seed, index, count):
    """First ``count`` uniforms in [0, 1) of trajectory ``index`` (for cross-checks)."""
    rng = _Xoshiro(seed, [index])
    return np.array([rng.uniform()[0] for _ in range(count)])


def gillespie_birth_death(up, down, k0, t_final, n_samples, seed):
    """State counts at ``t_final`` over ``n_samples`` birth-death trajectories.

    All trajectories advance together, one event per sweep.
    """
    up = np.asarray(up, dtype=np.float64)
    down = np.asarray(down, dtype=np.float64)
    rng = _Xoshiro(seed, np.arange(n_samples, dtype=np.uint64))
    k = np.full(n_samples, k0, dtype=np.int64)
    t = np.zeros(n_samples)
    active = np.ones(n_samples, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        total = up[k[idx]] + down[k[idx]]
        frozen = total <= 0.0
        active[idx[frozen]] = False
        idx = idx[~frozen]
        if idx.size == 0:
            break
        total = total[~frozen]
        u = rng.uniform(idx)
        t[idx] = t[idx] + (-np.log(1.0 - u) / total)
        done = t[idx] > t_final
        active[idx[done]] = False
        idx = idx[~done]
        if idx.size == 0:
            break
        total = total[~done]
        u = rng.uniform(idx)
        k[idx] += np.where(u * total < up[k[idx]], 1, -1)
    return np.bincount(k, minlength=up.shape[0]).astype(np.int64)
