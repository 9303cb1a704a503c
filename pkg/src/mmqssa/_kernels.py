"""Compiled inner loop of the direct-method SSA.

The generator argument is a ``numpy.random.Generator``; numba draws from its
bit generator in place, so the stream is exactly the one numpy would produce.
"""

import numba as nb
import numpy as np

FULL = 0
REDUCED = 1

EXHAUSTED = 0  # max_events fired
REACHED = 1  # t_stop reached
ABSORBED = 2  # total propensity is zero


@nb.njit(cache=True, nogil=True)
def propensities(kind, r, n_s, n_c, a):
    """Fill ``a`` with channel propensities and return their sum.

    full:    r = (omega*k0, k1/omega, k_m1, k2, E_T)
    reduced: r = (omega*k0, k2*e_T, K_M, omega)
    """
    if kind == FULL:
        a[0] = r[0]
        a[1] = r[1] * n_s * (r[4] - n_c)
        a[2] = r[2] * n_c
        a[3] = r[3] * n_c
        return a[0] + a[1] + a[2] + a[3]
    a[0] = r[0]
    a[1] = r[1] * n_s / (r[2] + n_s / r[3])
    return a[0] + a[1]


@nb.njit(cache=True, nogil=True)
def advance(kind, r, changes, x, t, t_stop, max_events, gen, acc, counts, rec_t, rec_x, rec_ch):
    """Fire up to ``max_events`` reactions or run until ``t_stop``.

    ``x`` (int64[3]: n_S, n_C, n_P) is updated in place. ``acc`` collects the
    holding-time integrals (T, sum n_S dt, sum n_S^2 dt); ``counts`` the
    number of firings per channel. When ``rec_t`` is non-empty, event ``i``
    is written to ``rec_t[i]``, ``rec_x[i]``, ``rec_ch[i]``.

    Stopping at ``t_stop`` discards the pending waiting time, which is exact
    because the waiting time is memoryless.

    Returns (events fired, final time, status).
    """
    m = changes.shape[0]
    a = np.empty(m)
    record = rec_t.shape[0] > 0
    fired = 0
    while fired < max_events:
        a0 = propensities(kind, r, x[0], x[1], a)
        n_s = float(x[0])
        if a0 <= 0.0:
            if np.isfinite(t_stop):
                hold = t_stop - t
                acc[0] += hold
                acc[1] += n_s * hold
                acc[2] += n_s * n_s * hold
            return fired, t, ABSORBED
        dt = gen.standard_exponential() / a0
        if t + dt >= t_stop:
            hold = t_stop - t
            acc[0] += hold
            acc[1] += n_s * hold
            acc[2] += n_s * n_s * hold
            return fired, t_stop, REACHED
        acc[0] += dt
        acc[1] += n_s * dt
        acc[2] += n_s * n_s * dt
        t += dt

        u = gen.random() * a0
        j = 0
        cum = a[0]
        while u >= cum and j < m - 1:
            j += 1
            cum += a[j]
        while a[j] <= 0.0:  # rounding at the top end of the cumulative sum
            j -= 1
        for k in range(3):
            x[k] += changes[j, k]
        counts[j] += 1
        if record:
            rec_t[fired] = t
            rec_ch[fired] = j
            for k in range(3):
                rec_x[fired, k] = x[k]
        fired += 1
    return fired, t, EXHAUSTED
