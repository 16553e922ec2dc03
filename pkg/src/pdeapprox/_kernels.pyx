# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: banded mat-vec, adaptive Dormand-Prince 5(4), birth-death SSA.

Every function here has a numpy twin in ``_fallback`` with the same signature
and the same arithmetic order, so the two backends agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, log, pow, isfinite
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

# Dormand-Prince 5(4) tableau
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 10.0

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2
STATUS_MAX_STEPS = 3


cdef inline void _matvec(const double[:, ::1] ab, int kl, int ku,
                         const double[::1] x, double[::1] y) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j, jlo, jhi
    cdef double s
    for i in range(n):
        jlo = i - kl
        if jlo < 0:
            jlo = 0
        jhi = i + ku
        if jhi > n - 1:
            jhi = n - 1
        s = 0.0
        for j in range(jlo, jhi + 1):
            s += ab[ku + i - j, j] * x[j]
        y[i] = s


def band_matvec(const double[:, ::1] ab, int kl, int ku, const double[::1] x):
    """Return ``A @ x`` for ``A`` in LAPACK band storage ``ab[ku + i - j, j]``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(x.shape[0])
    _matvec(ab, kl, ku, x, y)
    return y


cdef double _rms(const double[::1] v, const double[::1] y0, const double[::1] y1,
                 double rtol, double atol, bint use_y1) noexcept nogil:
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double s = 0.0, sc, a
    for i in range(n):
        a = fabs(y0[i])
        if use_y1 and fabs(y1[i]) > a:
            a = fabs(y1[i])
        sc = atol + rtol * a
        s += (v[i] / sc) * (v[i] / sc)
    return sqrt(s / n)


def dopri54_band(const double[:, ::1] ab, int kl, int ku, const double[::1] y0,
                 double t_final, double rtol, double atol, long max_steps):
    """Integrate ``y' = A y`` from 0 to ``t_final`` with an adaptive DP5(4) pair.

    Returns ``(y, status, t_reached, n_accepted, n_rejected)``.
    """
    cdef Py_ssize_t n = y0.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y_arr = np.array(y0, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef double[::1] ynew = np.empty(n)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] err = np.empty(n)
    cdef double[::1] k1 = np.empty(n)
    cdef double[::1] k2 = np.empty(n)
    cdef double[::1] k3 = np.empty(n)
    cdef double[::1] k4 = np.empty(n)
    cdef double[::1] k5 = np.empty(n)
    cdef double[::1] k6 = np.empty(n)
    cdef double[::1] k7 = np.empty(n)
    cdef double[::1] swap
    cdef double t = 0.0, h, d0, d1, d2, h0, h1, enorm, fac, eps = 2.220446049250313e-16
    cdef long n_acc = 0, n_rej = 0
    cdef int status = 0
    cdef bint finite

    if t_final <= 0.0 or n == 0:
        return y_arr, 0, 0.0, 0, 0

    with nogil:
        _matvec(ab, kl, ku, y, k1)
        # Hairer-Wanner starting step
        d0 = _rms(y, y, y, rtol, atol, False)
        d1 = _rms(k1, y, y, rtol, atol, False)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        if h0 > t_final:
            h0 = t_final
        for i in range(n):
            tmp[i] = y[i] + h0 * k1[i]
        _matvec(ab, kl, ku, tmp, k2)
        for i in range(n):
            err[i] = (k2[i] - k1[i]) / h0
        d2 = _rms(err, y, y, rtol, atol, False)
        if d1 <= 1e-15 and d2 <= 1e-15:
            h1 = h0 * 1e-3
            if h1 < 1e-6:
                h1 = 1e-6
        else:
            if d1 > d2:
                d2 = d1
            h1 = pow(0.01 / d2, 0.2)
        h = 100.0 * h0
        if h1 < h:
            h = h1
        if h > t_final:
            h = t_final

        while t < t_final:
            if n_acc + n_rej >= max_steps:
                status = 3
                break
            if h < 16.0 * eps * fabs(t) or h <= 0.0:
                status = 1
                break
            if t + h > t_final or t + 1.01 * h >= t_final:
                h = t_final - t

            for i in range(n):
                tmp[i] = y[i] + h * (A21 * k1[i])
            _matvec(ab, kl, ku, tmp, k2)
            for i in range(n):
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
            _matvec(ab, kl, ku, tmp, k3)
            for i in range(n):
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            _matvec(ab, kl, ku, tmp, k4)
            for i in range(n):
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _matvec(ab, kl, ku, tmp, k5)
            for i in range(n):
                tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                     + A64 * k4[i] + A65 * k5[i])
            _matvec(ab, kl, ku, tmp, k6)
            for i in range(n):
                ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                      + B5 * k5[i] + B6 * k6[i])
            _matvec(ab, kl, ku, ynew, k7)
            finite = True
            for i in range(n):
                err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i]
                              + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                if not isfinite(ynew[i]):
                    finite = False
            if not finite:
                status = 2
                break
            enorm = _rms(err, y, ynew, rtol, atol, True)

            if enorm <= 1.0:
                t = t + h
                n_acc += 1
                swap = y
                y = ynew
                ynew = swap
                swap = k1
                k1 = k7
                k7 = swap
                if enorm == 0.0:
                    fac = FAC_MAX
                else:
                    fac = SAFETY * pow(enorm, -0.2)
                    if fac > FAC_MAX:
                        fac = FAC_MAX
                    if fac < FAC_MIN:
                        fac = FAC_MIN
            else:
                n_rej += 1
                fac = SAFETY * pow(enorm, -0.2)
                if fac < FAC_MIN:
                    fac = FAC_MIN
                if fac > 1.0:
                    fac = 1.0
            h = h * fac

    return np.asarray(y).copy(), status, t, n_acc, n_rej


# xoshiro256** seeded per trajectory by splitmix64; the scheme is documented in _fallback
cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _splitmix64(uint64_t *state) noexcept nogil:
    cdef uint64_t z
    state[0] += GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _xoshiro_next(uint64_t *s) noexcept nogil:
    cdef uint64_t result = _rotl(s[1] * 5ULL, 7) * 9ULL
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


cdef inline double _uniform(uint64_t *s) noexcept nogil:
    return <double>(_xoshiro_next(s) >> 11) * (1.0 / 9007199254740992.0)


cdef inline void _seed_stream(uint64_t seed, uint64_t index, uint64_t *s) noexcept nogil:
    cdef uint64_t sm = seed
    cdef uint64_t base = _splitmix64(&sm)
    sm = base + index * GOLDEN
    s[0] = _splitmix64(&sm)
    s[1] = _splitmix64(&sm)
    s[2] = _splitmix64(&sm)
    s[3] = _splitmix64(&sm)


def uniform_stream(uint64_t seed, uint64_t index, Py_ssize_t count):
    """First ``count`` uniforms in [0, 1) of trajectory ``index`` (for cross-checks)."""
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count)
    _seed_stream(seed, index, s)
    for i in range(count):
        out[i] = _uniform(s)
    return out


def gillespie_birth_death(const double[::1] up, const double[::1] down, Py_ssize_t k0,
                          double t_final, Py_ssize_t n_samples, uint64_t seed):
    """State counts at ``t_final`` over ``n_samples`` birth-death trajectories.

    ``up[k]`` is the rate of k -> k+1, ``down[k]`` the rate of k -> k-1.
    """
    cdef Py_ssize_t n = up.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef uint64_t s[4]
    cdef Py_ssize_t m, k
    cdef double t, total, u
    with nogil:
        for m in range(n_samples):
            _seed_stream(seed, <uint64_t>m, s)
            k = k0
            t = 0.0
            while True:
                total = up[k] + down[k]
                if total <= 0.0:
                    break
                u = _uniform(s)
                t = t + (-log(1.0 - u) / total)
                if t > t_final:
                    break
                u = _uniform(s)
                if u * total < up[k]:
                    k += 1
                else:
                    k -= 1
            counts[k] += 1
    return counts_arr
