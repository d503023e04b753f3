"""Hot numeric kernels with numba and pure-numpy implementations.

Two inner loops dominate the toolkit's runtime: applying separable
resampling weights to image rows, and evaluating the pairwise-comparison
log-likelihood (with gradient and Hessian) inside the scale optimizer and
its bootstrap. Each kernel exists twice -- a numba ``@njit`` loop and a
vectorized numpy equivalent -- and :mod:`jndscale.accel` decides which one
the public names point to. ``benchmarks/bench_kernels.py`` compares them.
"""

import math

import numpy as np
from scipy.special import ndtr

from .accel import NUMBA_ENABLED, njit

SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT2 = 1.0 / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Separable resampling: out[r, o] = sum_t w[o, t] * img[r, idx[o, t]]
# ---------------------------------------------------------------------------

@njit(cache=True)
def _resample_axis_numba(img, idx, w):
    n_rows = img.shape[0]
    n_out = idx.shape[0]
    taps = idx.shape[1]
    out = np.empty((n_rows, n_out))
    for r in range(n_rows):
        for o in range(n_out):
            acc = 0.0
            for t in range(taps):
                acc += w[o, t] * img[r, idx[o, t]]
            out[r, o] = acc
    return out


def _resample_axis_numpy(img, idx, w):
    # img[:, idx] gathers a (rows, n_out, taps) block; contract the taps.
    return np.einsum("rot,ot->ro", img[:, idx], w)


# ---------------------------------------------------------------------------
# Pairwise Thurstone Case V log-likelihood
#
# counts[i, k] = effective number of times stimulus i was judged more
# distorted than stimulus k (diagonal must be zero).  The objective is
#   L(s) = sum_{i != k} counts[i, k] * ln clamp(Phi(s_i - s_k), floor, 1-floor)
# returned together with its gradient and Hessian. Clamped pairs contribute
# a constant to L and nothing to the derivatives, which keeps perfectly
# separated pairs from pushing scales to infinity.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _pair_loglik_numba(counts, scales, prob_floor):
    n = counts.shape[0]
    ll = 0.0
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    hi = 1.0 - prob_floor
    log_lo = math.log(prob_floor)
    log_hi = math.log(hi)
    for i in range(n):
        for k in range(i + 1, n):
            c_ik = counts[i, k]
            c_ki = counts[k, i]
            if c_ik == 0.0 and c_ki == 0.0:
                continue
            d = scales[i] - scales[k]
            p = 0.5 * (1.0 + math.erf(d * INV_SQRT2))
            if p <= prob_floor:
                ll += c_ik * log_lo + c_ki * log_hi
                continue
            if p >= hi:
                ll += c_ik * log_hi + c_ki * log_lo
                continue
            q = 1.0 - p
            ll += c_ik * math.log(p) + c_ki * math.log(q)
            pdf = math.exp(-0.5 * d * d) / SQRT_2PI
            r_p = pdf / p
            r_q = pdf / q
            g = c_ik * r_p - c_ki * r_q
            grad[i] += g
            grad[k] -= g
            # Second derivative of the pair term w.r.t. d; always <= 0.
            curv = -c_ik * (d * r_p + r_p * r_p) + c_ki * (d * r_q - r_q * r_q)
            hess[i, i] += curv
            hess[k, k] += curv
            hess[i, k] -= curv
            hess[k, i] -= curv
    return ll, grad, hess


def _pair_loglik_numpy(counts, scales, prob_floor):
    d = scales[:, None] - scales[None, :]
    p = ndtr(d)
    hi = 1.0 - prob_floor
    has = counts > 0
    interior = has & (p > prob_floor) & (p < hi)

    ll = float(np.sum(counts[has] * np.log(np.clip(p[has], prob_floor, hi))))

    pdf = np.exp(-0.5 * d * d) / SQRT_2PI
    rate = np.zeros_like(p)
    rate[interior] = pdf[interior] / p[interior]

    g = counts * rate
    grad = g.sum(axis=1) - g.sum(axis=0)

    # u[i, k] = -c_ik * (ln Phi)''(d_ik) >= 0; the Hessian is the negated
    # graph Laplacian of the symmetrized pair weights.
    u = counts * (d * rate + rate * rate)
    s = u + u.T
    hess = s - np.diag(s.sum(axis=1))
    return ll, grad, hess


if NUMBA_ENABLED:
    resample_axis = _resample_axis_numba
    pair_loglik = _pair_loglik_numba
else:
    resample_axis = _resample_axis_numpy
    pair_loglik = _pair_loglik_numpy
