"""Pure-Python reference kernels.

Same contracts as the compiled ``_ckernels`` module. Used when the extension
is not built or when ``STEINWSUM_PURE=1`` is set.
"""
import math

import numpy as np


def convolve(a, b):
    """Direct convolution, each output cell summed in ascending index order."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    na, nb = len(a), len(b)
    if na == 0 or nb == 0:
        return np.zeros(0)
    al = a.tolist()
    bl = b.tolist()
    out = np.empty(na + nb - 1)
    for k in range(na + nb - 1):
        lo = max(0, k - nb + 1)
        hi = min(k, na - 1)
        out[k] = math.fsum(al[j] * bl[k - j] for j in range(lo, hi + 1))
    return out


def stein_series(w, m):
    """sum_{k>=1} k * |m*w[k] - (k+1)*w[k+1]| over k = 1 .. len(w)-2."""
    wl = np.asarray(w, dtype=np.float64).tolist()
    return math.fsum(k * abs(m * wl[k] - (k + 1) * wl[k + 1]) for k in range(1, len(wl) - 1))


def stein_solve_batch(ind, p, lam, m_ext):
    """Bounded solutions of the Poisson Stein equation for indicator test sets.

    ``ind`` is an (m, K+1) 0/1 array, row r the indicator of A_r on [0, K];
    ``p`` holds the Poisson(lam) masses on [0, K]. The tail ratios
    S(k)/p(k) are seeded at index ``m_ext`` and run backwards.

    Returns (g, pa): g is (m, K+1) with g[:, 0] = 0, pa[r] = P(A_r).
    """
    ind = np.asarray(ind, dtype=np.uint8)
    p = np.asarray(p, dtype=np.float64)
    nrows, kp1 = ind.shape
    big_k = kp1 - 1

    # s_ratio[k] = P(X > k) / p(k), by the backward recurrence
    # s(k) = lam/(k+1) * (1 + s(k+1)).
    s_ratio = [0.0] * (m_ext + 1)
    for k in range(m_ext - 1, -1, -1):
        s_ratio[k] = lam / (k + 1) * (1.0 + s_ratio[k + 1])

    cdf = [0.0] * kp1
    acc, comp = 0.0, 0.0
    for k in range(kp1):
        acc, comp = _neumaier(acc, comp, float(p[k]))
        cdf[k] = acc + comp

    g = np.zeros((nrows, kp1))
    pa = np.zeros(nrows)
    for r in range(nrows):
        row = ind[r].tolist()
        # a_hi[k] = P(A and X > k) / p(k)
        a_hi = [0.0] * kp1
        for k in range(big_k - 1, -1, -1):
            a_hi[k] = lam / (k + 1) * (row[k + 1] + a_hi[k + 1])
        acc, comp = 0.0, 0.0
        grow = g[r]
        for k in range(big_k):
            if row[k]:
                acc, comp = _neumaier(acc, comp, float(p[k]))
            a_lo = acc + comp
            grow[k + 1] = (a_lo * s_ratio[k] - a_hi[k] * cdf[k]) / lam
        if row[big_k]:
            acc, comp = _neumaier(acc, comp, float(p[big_k]))
        pa[r] = acc + comp
    return g, pa


def _neumaier(s, c, x):
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c
