"""Marginal and bivariate mark laws: exact evaluation and seeded sampling.

Univariate families: exponential, Pareto, uniform, standard normal,
standard Cauchy and geometric (failure counts, pmf p*(1-p)^k).  Bivariate
families: the Marshall-Olkin exponential (three independent shock clocks)
and the Marshall-Olkin geometric (paired Bernoulli streams).

All evaluation functions are pure; samplers draw from a freshly
constructed ``numpy`` generator keyed by (seed, stream), so identical
seeds reproduce identical output and distinct streams are independent.

Lattice conventions for the geometric law: for real y >= 0,
``P(X <= y) = P(X <= floor(y))`` and ``P(X >= y) = q**ceil(y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "Exponential",
    "Pareto",
    "Uniform",
    "StdNormal",
    "StdCauchy",
    "Geometric",
    "MOExponentialLaw",
    "MOGeometricLaw",
    "make_rng",
    "marginal_cdf",
    "marginal_survival",
    "marginal_quantile",
    "sample_marginal",
    "mo_exponential_survival",
    "sample_mo_exponential",
    "mo_geometric_pmf",
    "mo_geometric_survival",
    "sample_mo_geometric",
]


def make_rng(seed, stream=0):
    """Deterministic generator for (seed, stream); streams are independent."""
    return np.random.default_rng([int(seed), int(stream)])


# ---------------------------------------------------------------------------
# univariate marginal laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)))

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, np.exp(-self.rate * np.maximum(x, 0.0)))

    def quantile(self, p):
        return -np.log1p(-np.asarray(p, dtype=float)) / self.rate

    def sample(self, rng, size):
        return self.quantile(rng.random(size))


@dataclass(frozen=True)
class Pareto:
    shape: float  # tail index alpha
    scale: float  # left endpoint phi

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("shape and scale must be positive")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = 1.0 - (self.scale / np.maximum(x, self.scale)) ** self.shape
        return np.where(x < self.scale, 0.0, out)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        out = (self.scale / np.maximum(x, self.scale)) ** self.shape
        return np.where(x < self.scale, 1.0, out)

    def quantile(self, p):
        return self.scale * (1.0 - np.asarray(p, dtype=float)) ** (-1.0 / self.shape)

    def sample(self, rng, size):
        return self.quantile(rng.random(size))


@dataclass(frozen=True)
class Uniform:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("need lower < upper")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lower) / (self.upper - self.lower), 0.0, 1.0)

    def survival(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, p):
        return self.lower + (self.upper - self.lower) * np.asarray(p, dtype=float)

    def sample(self, rng, size):
        return self.quantile(rng.random(size))


@dataclass(frozen=True)
class StdNormal:
    """Standard normal; cdf/survival via erfc with |error| well below 1e-12."""

    def cdf(self, x):
        return ndtr(np.asarray(x, dtype=float))

    def survival(self, x):
        return ndtr(-np.asarray(x, dtype=float))

    def quantile(self, p):
        return ndtri(np.asarray(p, dtype=float))

    def sample(self, rng, size):
        # inverse transform of uniforms keeps the stream deterministic
        return ndtri(np.maximum(rng.random(size), 1e-300))


@dataclass(frozen=True)
class StdCauchy:
    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        # arctan(1/x) form keeps full precision in the tails
        base = np.arctan(x) / np.pi + 0.5
        with np.errstate(divide="ignore"):
            tail_hi = 1.0 - np.arctan(1.0 / np.where(x > 1, x, np.inf)) / np.pi
            tail_lo = -np.arctan(1.0 / np.where(x < -1, x, -np.inf)) / np.pi
        out = np.where(x > 1, tail_hi, base)
        return np.where(x < -1, tail_lo, out)

    def survival(self, x):
        return self.cdf(-np.asarray(x, dtype=float))

    def quantile(self, p):
        return np.tan(np.pi * (np.asarray(p, dtype=float) - 0.5))

    def sample(self, rng, size):
        return self.quantile(rng.random(size))


@dataclass(frozen=True)
class Geometric:
    """Failure count before the first success; q is the failure probability.

    pmf p*(1-p)^k with p = 1-q on k = 0, 1, 2, ...  (not the shifted
    trial-count variant).
    """

    q: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")

    def pmf(self, k):
        k = np.asarray(k)
        out = (1.0 - self.q) * self.q ** np.maximum(k, 0)
        return np.where((k < 0) | (k != np.floor(k)), 0.0, out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = -np.expm1(np.log(self.q) * (np.floor(np.maximum(x, 0.0)) + 1.0))
        return np.where(x < 0, 0.0, out)

    def survival(self, x):
        """P(X >= x) = q**ceil(x) for x > 0, and 1 for x <= 0."""
        x = np.asarray(x, dtype=float)
        out = self.q ** np.ceil(np.maximum(x, 0.0))
        return np.where(x <= 0, 1.0, out)

    def sample(self, rng, size):
        u = np.maximum(rng.random(size), 1e-300)
        return np.floor(np.log(u) / np.log(self.q)).astype(np.int64)


MarginalLaw = Exponential | Pareto | Uniform | StdNormal | StdCauchy | Geometric


def marginal_cdf(law, x):
    return law.cdf(x)


def marginal_survival(law, x):
    return law.survival(x)


def marginal_quantile(law, p):
    return law.quantile(p)


def sample_marginal(law, seed, count, stream=0):
    """``count`` i.i.d. draws by inverse transform, deterministic in seed."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return law.sample(make_rng(seed, stream), int(count))


# ---------------------------------------------------------------------------
# Marshall-Olkin exponential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MOExponentialLaw:
    """Bivariate exponential driven by shocks at rates (nu1, nu2, nu12)."""

    nu1: float
    nu2: float
    nu12: float

    def __post_init__(self):
        if min(self.nu1, self.nu2, self.nu12) <= 0:
            raise ValueError("all shock rates must be strictly positive")

    @property
    def nu(self):
        return self.nu1 + self.nu2 + self.nu12

    def survival(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        if np.any(y1 < 0) or np.any(y2 < 0):
            raise ValueError("coordinates must be nonnegative")
        return np.exp(-self.nu1 * y1 - self.nu2 * y2 - self.nu12 * np.maximum(y1, y2))

    def sample(self, rng, size):
        e1 = rng.exponential(1.0 / self.nu1, size)
        e2 = rng.exponential(1.0 / self.nu2, size)
        e12 = rng.exponential(1.0 / self.nu12, size)
        return np.stack([np.minimum(e1, e12), np.minimum(e2, e12)], axis=-1)


def mo_exponential_survival(law, y1, y2):
    return law.survival(y1, y2)


def sample_mo_exponential(law, seed, count, stream=0):
    """(X1, X2) = (min(E1, E12), min(E2, E12)); ties carry the singular mass."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return law.sample(make_rng(seed, stream), int(count))


# ---------------------------------------------------------------------------
# Marshall-Olkin geometric
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MOGeometricLaw:
    """Bivariate failure counts of paired Bernoulli streams.

    Parameters are the marginal failure probabilities q1, q2 and the joint
    failure probability p00, with p00 >= q1*q2 (nonnegative association).
    """

    q1: float
    q2: float
    p00: float

    def __post_init__(self):
        for name, v in (("q1", self.q1), ("q2", self.q2), ("p00", self.p00)):
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.p00 > min(self.q1, self.q2) + 1e-15:
            raise ValueError("p00 cannot exceed min(q1, q2)")
        if self.p00 < self.q1 * self.q2 - 1e-15:
            raise ValueError("need p00 >= q1*q2")
        if 1.0 - self.q1 - self.q2 + self.p00 < -1e-15:
            raise ValueError("cell probability p11 would be negative")

    @classmethod
    def from_gamma_delta(cls, gamma, delta, p11):
        """Parameterise by p10 = gamma*p11, p01 = delta*p11.

        Requires gamma, delta > 0 and (1 + gamma + delta) * p11 < 1.
        """
        if gamma <= 0 or delta <= 0:
            raise ValueError("gamma and delta must be positive")
        if not 0.0 < p11 < 1.0 or (1.0 + gamma + delta) * p11 >= 1.0:
            raise ValueError("need (1 + gamma + delta) * p11 < 1")
        return cls(
            q1=1.0 - (1.0 + gamma) * p11,
            q2=1.0 - (1.0 + delta) * p11,
            p00=1.0 - (1.0 + gamma + delta) * p11,
        )

    @property
    def cells(self):
        """(p00, p01, p10, p11) with p01 = P(stream-1 fails, stream-2 succeeds)."""
        p00 = self.p00
        p01 = self.q1 - p00
        p10 = self.q2 - p00
        p11 = 1.0 - self.q1 - self.q2 + p00
        return p00, p01, p10, p11

    def pmf(self, k, l):
        k = np.asarray(k)
        l = np.asarray(l)
        if np.any(k < 0) or np.any(l < 0):
            raise ValueError("indices must be nonnegative")
        q1, q2, p00 = self.q1, self.q2, self.p00
        below = p00**k * q2 ** np.maximum(l - k, 0) * (1.0 - p00 / q2 - q2 + p00)
        diag = p00**k * (1.0 - q1 - q2 + p00)
        above = p00**l * q1 ** np.maximum(k - l, 0) * (1.0 - q1 - p00 / q1 + p00)
        out = np.where(k < l, below, np.where(k > l, above, diag))
        return out

    def survival(self, k, l):
        """P(X1 >= k, X2 >= l); real arguments use the ceiling convention."""
        k = np.ceil(np.maximum(np.asarray(k, dtype=float), 0.0))
        l = np.ceil(np.maximum(np.asarray(l, dtype=float), 0.0))
        q1, q2, p00 = self.q1, self.q2, self.p00
        below = p00**k * q2 ** np.maximum(l - k, 0.0)
        above = p00**l * q1 ** np.maximum(k - l, 0.0)
        return np.where(k < l, below, np.where(k > l, above, p00**k))

    def sample(self, rng, size):
        """Exact draw via the leading-joint-failure decomposition.

        The paired streams give M ~ Geom(p00) joint failures before the
        first trial with any success; conditionally on that trial's cell,
        the lagging stream (if any) continues alone with its marginal
        failure probability.  O(1) work per draw; distributed identically
        to literal trial-by-trial simulation.
        """
        p00, p01, p10, p11 = self.cells

        def geo(q):
            u = np.maximum(rng.random(size), 1e-300)
            return np.floor(np.log(u) / math.log(q)).astype(np.int64)

        m = geo(p00)
        u = rng.random(size) * (1.0 - p00)
        # cell at the breaking trial: [0, p01) -> stream-2 done first,
        # [p01, p01+p10) -> stream-1 done first, else both done.
        g1 = geo(self.q1)
        g2 = geo(self.q2)
        x1 = np.where(u < p01, m + 1 + g1, m)
        x2 = np.where((u >= p01) & (u < p01 + p10), m + 1 + g2, m)
        return np.stack([x1, x2], axis=-1)


def mo_geometric_pmf(law, k, l):
    return law.pmf(k, l)


def mo_geometric_survival(law, k, l):
    return law.survival(k, l)


def sample_mo_geometric(law, seed, count, stream=0):
    if count < 0:
        raise ValueError("count must be >= 0")
    return law.sample(make_rng(seed, stream), int(count))
