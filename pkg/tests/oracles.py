"""Independent reference implementations used as test oracles.

Constants are recomputed in 50-digit decimal arithmetic; scans re-derive
stopping times from scratch with loss sums rather than running means.
"""

from __future__ import annotations

import math
from decimal import Decimal, getcontext

getcontext().prec = 50

E = Decimal(1).exp()


def _d(x) -> Decimal:
    return Decimal(repr(float(x))) if not isinstance(x, (int, Decimal)) else Decimal(x)


def _ceil(x: Decimal) -> int:
    return int(x.to_integral_value(rounding="ROUND_CEILING"))


def _floor(x: Decimal) -> int:
    return int(x.to_integral_value(rounding="ROUND_FLOOR"))


def constants(k: int, theta_l: float, theta_u: float, delta: float) -> dict:
    # Delta is the double difference, as the library computes it
    big = _d(theta_u - theta_l)
    k_, d_ = _d(k), _d(delta)
    d2 = big * big
    n_cap = _ceil(2 * E / ((E - 1) * d2) * (2 * k_.sqrt() / (d2 * d_)).ln())
    log_up = (Decimal(n_cap) / d_).ln()
    alpha = (1 + k_.ln() / log_up).sqrt()
    theta = _d(theta_u) - big / (1 + alpha)
    t_raw = 2 / d2 * (k_.sqrt() * n_cap / d_).ln()
    n_floor = _ceil(log_up / (2 * max(_d(theta_u), 1 - _d(theta_l)) ** 2))
    t2 = _floor(2 / d2 * (448 * k_ / (d2 * d2 * d_)).ln())
    gap = 2 / d2 * ((52 * k_.sqrt() / d2).ln() - ((3 * k_.sqrt() / (d2 * d_)).ln()).ln())
    return {
        "n_cap": n_cap, "alpha": float(alpha), "theta": float(theta), "t_delta": _ceil(t_raw),
        "t_raw": float(t_raw), "n_floor": n_floor, "t_double": t2, "gap": float(gap),
    }


def asym_scan(losses, k, theta_l, theta_u, delta):
    """First n with LB >= theta_l (positive) or UB < theta_u (negative), from loss sums."""
    c = constants(k, theta_l, theta_u, delta)
    lo = math.log(k * c["n_cap"] / delta)
    up = math.log(c["n_cap"] / delta)
    s = 0.0
    for n, x in enumerate(losses, start=1):
        s += x
        m = s / n
        if m - math.sqrt(lo / (2 * n)) >= theta_l:
            return n, "positive"
        if m + math.sqrt(up / (2 * n)) < theta_u:
            return n, "negative"
    return None


def sym_scan(losses, k, theta_l, theta_u, delta):
    s = 0.0
    for n, x in enumerate(losses, start=1):
        s += x
        m = s / n
        r = math.sqrt(math.log(2 * k * n * n / delta) / (2 * n))
        if m - r >= theta_l:
            return n, "positive"
        if m + r < theta_u:
            return n, "negative"
    return None


def kl(x: float, y: float) -> float:
    """Bernoulli KL written out via xlogy-style terms."""
    def term(a, b):
        return 0.0 if a == 0 else a * (math.log(a) - math.log(b))
    return term(x, y) + term(1 - x, 1 - y)


def mean_sd(xs):
    n = len(xs)
    m = sum(xs) / n
    return m, math.sqrt(sum((x - m) ** 2 for x in xs) / (n - 1))
