"""Compiled inner loops.

Every floating-point expression here is written in the same order as its
pure-Python counterpart in ``bounds``, ``policies`` and ``core`` so that both
backends produce identical trajectories.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_INV_2_53 = 1.0 / 9007199254740992.0

APT_P, UCB, LUCB = 0, 1, 2
ASYMMETRIC, SYMMETRIC = 0, 1
NEGATIVE, POSITIVE = 0, 1
FIRED_NONE, FIRED_NEGATIVE, FIRED_POSITIVE = 0, 1, 2


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def uniform(key, n):
    return float(mix64(key + np.uint64(n) * _GOLDEN) >> _S11) * _INV_2_53


@njit(cache=True, nogil=True)
def bernoulli_stream(key, mu, length):
    out = np.empty(length, dtype=np.float64)
    for n in range(1, length + 1):
        out[n - 1] = 1.0 if uniform(key, n) < mu else 0.0
    return out


@njit(cache=True, nogil=True)
def _radii(family, n, delta, k_bound, log_lower, log_upper):
    if family == ASYMMETRIC:
        return math.sqrt(log_lower / (2 * n)), math.sqrt(log_upper / (2 * n))
    r = math.sqrt(math.log(2.0 * k_bound * n * n / delta) / (2 * n))
    return r, r


@njit(cache=True, nogil=True)
def judge(family, mean, n, theta_l, theta_u, delta, k_bound, log_lower, log_upper):
    r_lo, r_up = _radii(family, n, delta, k_bound, log_lower, log_upper)
    if mean - r_lo >= theta_l:
        return FIRED_POSITIVE
    if mean + r_up < theta_u:
        return FIRED_NEGATIVE
    return FIRED_NONE


@njit(cache=True, nogil=True)
def _index(policy, t, n, mean, theta, k_bound, delta):
    if policy == APT_P:
        return math.sqrt(n) * (mean - theta)
    if n == 0:
        return np.inf
    if policy == UCB:
        return mean + math.sqrt(math.log(t) / (2 * n))
    if t % 2 == 1:
        return mean
    tf = float(t)
    return mean + math.sqrt(math.log(5.0 * k_bound * (tf * tf * tf * tf) / (4.0 * delta)) / (2 * n))


@njit(cache=True, nogil=True)
def run_bernoulli(means, keys, theta_l, theta_u, delta, theta, log_lower, log_upper, policy, family, draws, judged, mu_hat):
    """One BAEC run.  Fills ``draws``/``judged``/``mu_hat`` in place.

    Returns (verdict, positive_arm or -1, total draws).
    """
    k = means.shape[0]
    active = np.ones(k, dtype=np.bool_)
    for i in range(k):
        mu_hat[i] = theta
        draws[i] = 0
        judged[i] = False
    remaining = k
    t = 1
    while remaining > 0:
        best = -1
        best_value = -np.inf
        for i in range(k):
            if not active[i]:
                continue
            v = _index(policy, t, draws[i], mu_hat[i], theta, k, delta)
            if best < 0 or v > best_value:
                best = i
                best_value = v
        n_old = draws[best]
        n_new = n_old + 1
        draws[best] = n_new
        x = 1.0 if uniform(keys[best], n_new) < means[best] else 0.0
        mu_hat[best] = (mu_hat[best] * n_old + x) / n_new
        fired = judge(family, mu_hat[best], n_new, theta_l, theta_u, delta, k, log_lower, log_upper)
        if fired == FIRED_POSITIVE:
            judged[best] = True
            return POSITIVE, best, t
        if fired == FIRED_NEGATIVE:
            active[best] = False
            judged[best] = True
            remaining -= 1
        t += 1
    return NEGATIVE, -1, t - 1


@njit(cache=True, nogil=True)
def single_arm_tau(mu, key, theta_l, theta_u, delta, k_bound, log_lower, log_upper, theta, family, max_n):
    """First n at which a lone arm's stopping condition fires.

    Returns (n, fired) with fired == FIRED_NONE if nothing fired by ``max_n``.
    """
    mean = theta
    for n in range(1, max_n + 1):
        x = 1.0 if uniform(key, n) < mu else 0.0
        mean = (mean * (n - 1) + x) / n
        fired = judge(family, mean, n, theta_l, theta_u, delta, k_bound, log_lower, log_upper)
        if fired != FIRED_NONE:
            return n, fired
    return max_n, FIRED_NONE
