"""Loss environments.

Bernoulli draws come from a stateless counter-based generator: the ``n``-th
loss of arm ``i`` is a pure function of ``(seed, i, n)``.  Any two consumers
that share a seed therefore see identical per-arm streams (common random
numbers), regardless of the order in which they pull arms.

Generator: the SplitMix64 output function evaluated at counter ``n`` of a
per-arm key, i.e. ``mix64(key + n * GOLDEN)``.  Keys and child seeds are
produced by the same bijective mixer, so distinct inputs give distinct keys.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import ValidationError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


class EnvironmentExhausted(RuntimeError):
    """A replay stream was asked for more losses than it holds."""

    def __init__(self, arm: int, n: int, available: int):
        super().__init__(f"arm {arm}: draw {n} requested but only {available} losses provided")
        self.arm = arm
        self.n = n
        self.available = available


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Child seed number ``index`` of ``master_seed``; injective in ``index`` below 2**64."""
    return mix64(master_seed + (index + 1) * GOLDEN)


def arm_key(seed: int, arm: int) -> int:
    return mix64((seed & MASK64) ^ mix64(arm + 1))


def uniform(key: int, n: int) -> float:
    """The ``n``-th variate (1-based) of the stream keyed by ``key``, in [0, 1)."""
    return (mix64(key + n * GOLDEN) >> 11) * _INV_2_53


def bernoulli_loss(u: float, mu: float) -> float:
    return 1.0 if u < mu else 0.0


def _check_means(means: Iterable[float], name: str = "means") -> tuple[float, ...]:
    out = []
    for i, m in enumerate(means):
        m = float(m)
        if not (0.0 <= m <= 1.0):
            raise ValidationError(name, f"entry {i} = {m} outside [0, 1]")
        out.append(m)
    if not out:
        raise ValidationError(name, "no means given")
    return tuple(out)


@dataclass(frozen=True)
class BernoulliEnv:
    means: tuple[float, ...]
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "means", _check_means(self.means))
        object.__setattr__(self, "master_seed", int(self.master_seed) & MASK64)

    @property
    def k(self) -> int:
        return len(self.means)

    def keys(self) -> np.ndarray:
        return np.array([arm_key(self.master_seed, i) for i in range(self.k)], dtype=np.uint64)

    def draw(self, arm: int, n: int) -> float:
        if not 0 <= arm < self.k:
            raise IndexError(f"arm {arm} out of range for K={self.k}")
        if n < 1:
            raise ValueError("draw index is 1-based")
        return bernoulli_loss(uniform(arm_key(self.master_seed, arm), n), self.means[arm])

    def stream(self, arm: int, length: int) -> np.ndarray:
        """First ``length`` losses of ``arm`` as a float array."""
        from ._kernels import bernoulli_stream

        return bernoulli_stream(np.uint64(arm_key(self.master_seed, arm)), self.means[arm], length)


@dataclass(frozen=True)
class ReplayEnv:
    """Fixed per-arm loss sequences; raises once a sequence runs out."""

    losses: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(_check_means(row, "losses") for row in self.losses)
        object.__setattr__(self, "losses", rows)

    @property
    def k(self) -> int:
        return len(self.losses)

    @property
    def means(self) -> tuple[float, ...]:
        return tuple(sum(row) / len(row) for row in self.losses)

    def draw(self, arm: int, n: int) -> float:
        row = self.losses[arm]
        if n > len(row):
            raise EnvironmentExhausted(arm, n, len(row))
        return row[n - 1]


Environment = BernoulliEnv | ReplayEnv


def draw(env: Environment, arm: int, n: int) -> float:
    return env.draw(arm, n)


def synth_means(k: int, m: int, theta: float, seed: int) -> list[float]:
    """``m`` means uniform on [theta, 1] and ``k - m`` uniform on [0, theta), shuffled."""
    if not 0 <= m <= k:
        raise ValidationError("m", f"must satisfy 0 <= m <= k={k}, got {m}")
    if not 0.0 < theta < 1.0:
        raise ValidationError("theta", f"must lie in (0, 1), got {theta}")
    rng = np.random.default_rng(seed & MASK64)
    high = rng.uniform(theta, 1.0, size=m)
    low = rng.uniform(0.0, theta, size=k - m)
    # theta * u can round up to theta itself
    low = np.minimum(low, np.nextafter(theta, 0.0))
    means = np.concatenate([high, low])
    rng.shuffle(means)
    return [float(x) for x in means]


def _read_bundled_csv() -> str:
    return resources.files("baec.data").joinpath("ipinyou_means.csv").read_text()


def parse_means_csv(text: str) -> list[float]:
    """One mean per line, optional ``mu`` header, blank lines ignored."""
    values: list[float] = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not row[0].strip():
            continue
        cell = row[0].strip()
        if lineno == 1 and cell.lower() == "mu":
            continue
        try:
            value = float(cell)
        except ValueError:
            raise ValidationError("means", f"line {lineno}: not a number: {cell!r}") from None
        if not (0.0 <= value <= 1.0) or math.isnan(value):
            raise ValidationError("means", f"line {lineno}: {value} outside [0, 1]")
        values.append(value)
    if not values:
        raise ValidationError("means", "file holds no means")
    return values


def load_means(path: str | Path) -> list[float]:
    return parse_means_csv(Path(path).read_text())


def ipinyou_means() -> list[float]:
    """Twenty click-rate-derived means (click rate x 100), sorted descending."""
    return parse_means_csv(_read_bundled_csv())


def ipinyou_threshold_center(m_prime: int, means: Sequence[float] | None = None) -> float:
    """Center of the threshold pair that puts about ``m_prime`` arms above it."""
    mu = list(means) if means is not None else ipinyou_means()
    if m_prime == 0:
        return mu[0] + (mu[0] - mu[1]) / 2.0
    if not 1 <= m_prime < len(mu):
        raise ValidationError("m_prime", f"must lie in [0, {len(mu) - 1}], got {m_prime}")
    return (mu[m_prime - 1] + mu[m_prime]) / 2.0
