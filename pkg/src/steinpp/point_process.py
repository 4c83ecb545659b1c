"""Point configurations, the d1 matching distance, and process simulators.

Contains the bounded-Wasserstein d1 distance between finite point
configurations (exact optimal assignment under d0 = min(Euclidean, 1)),
marked-point-process-of-exceedances simulation, Poisson random measure
sampling for general finite intensities, and the spatial
immigration-death process whose equilibrium is that Poisson process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from ._quad import _gl
from .distributions import MOExponentialLaw, MOGeometricLaw, make_rng

__all__ = [
    "PointConfiguration",
    "d1_distance",
    "ThresholdRay",
    "RectRay",
    "BoxComplement",
    "MppeResult",
    "simulate_mppe",
    "sample_prm",
    "Trajectory",
    "immigration_death_simulate",
    "immigration_death_counts",
]


class PointConfiguration:
    """Finite multiset of points in R^d, d in {1, 2}."""

    def __init__(self, points=()):
        pts = np.asarray(points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 1)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] not in (1, 2):
            raise ValueError("points must be an (m, d) array with d in {1, 2}")
        self.points = pts

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def __eq__(self, other):
        if not isinstance(other, PointConfiguration):
            return NotImplemented
        if len(self) != len(other) or (len(self) and self.dim != other.dim):
            return False
        a = self.points[np.lexsort(self.points.T[::-1])]
        b = other.points[np.lexsort(other.points.T[::-1])]
        return bool(np.array_equal(a, b))

    def add(self, point):
        pt = np.atleast_1d(np.asarray(point, dtype=float))[None, :]
        if len(self) == 0:
            return PointConfiguration(pt)
        return PointConfiguration(np.vstack([self.points, pt]))

    def __repr__(self):
        return f"PointConfiguration(n={len(self)}, d={self.dim})"


def d1_distance(conf1, conf2):
    """Average closest-matching distance between equal-size configurations.

    Returns 1 when the cardinalities differ; otherwise the minimum over
    point matchings of the mean d0 distance, d0 = min(Euclidean, 1),
    solved by exact optimal assignment.  Always lies in [0, 1].
    """
    m1, m2 = len(conf1), len(conf2)
    if m1 != m2:
        return 1.0
    if m1 == 0:
        return 0.0
    cost = np.minimum(cdist(conf1.points, conf2.points), 1.0)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())


# ---------------------------------------------------------------------------
# exceedance regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdRay:
    """[u, inf) for univariate marks."""

    u: float

    def contains(self, x):
        return np.asarray(x, dtype=float) >= self.u

    def probability(self, law):
        return float(law.survival(self.u))


@dataclass(frozen=True)
class RectRay:
    """[u1, inf) x [u2, inf): jointly extreme points."""

    u1: float
    u2: float

    def contains(self, xy):
        xy = np.asarray(xy, dtype=float)
        return (xy[:, 0] >= self.u1) & (xy[:, 1] >= self.u2)

    def probability(self, law):
        return float(law.survival(self.u1, self.u2))


@dataclass(frozen=True)
class BoxComplement:
    """Complement of (-inf, u1) x (-inf, u2): at least one extreme component."""

    u1: float
    u2: float

    def contains(self, xy):
        xy = np.asarray(xy, dtype=float)
        return (xy[:, 0] >= self.u1) | (xy[:, 1] >= self.u2)

    def probability(self, law):
        if isinstance(law, MOExponentialLaw):
            s1 = math.exp(-(law.nu1 + law.nu12) * self.u1)
            s2 = math.exp(-(law.nu2 + law.nu12) * self.u2)
        elif isinstance(law, MOGeometricLaw):
            s1 = law.q1 ** math.ceil(max(self.u1, 0.0))
            s2 = law.q2 ** math.ceil(max(self.u2, 0.0))
        else:
            raise TypeError("box-complement regions need a bivariate law")
        return float(s1 + s2 - law.survival(self.u1, self.u2))


@dataclass
class MppeResult:
    configuration: PointConfiguration
    count: int
    meta: dict = field(default_factory=dict)


def simulate_mppe(law, region, n, seed, normalization=None, stream=0):
    """Marked point process of exceedances for an i.i.d. n-sample.

    Draws n marks from ``law``, keeps those falling in ``region`` (stated
    in original coordinates), then applies the per-coordinate affine
    normalisation x -> (x - b)/a when given as ((a1, b1), ...) or (a, b).
    The retained count W_A is binomial(n, P(X in region)).
    """
    rng = make_rng(seed, stream)
    marks = law.sample(rng, int(n))
    marks = np.asarray(marks, dtype=float)
    if marks.ndim == 1:
        keep = region.contains(marks)
        kept = marks[keep][:, None]
    else:
        keep = region.contains(marks)
        kept = marks[keep]
    if normalization is not None:
        norm = np.atleast_2d(np.asarray(normalization, dtype=float))
        if norm.shape[0] == 1 and kept.shape[1] == 2:
            norm = np.vstack([norm, norm])
        for j in range(kept.shape[1]):
            a, b = norm[j]
            if a <= 0:
                raise ValueError("normalisation scale must be positive")
            kept[:, j] = (kept[:, j] - b) / a
    count = int(np.count_nonzero(keep))
    return MppeResult(PointConfiguration(kept), count,
                      meta={"n": int(n), "p_region": region.probability(law)})


# ---------------------------------------------------------------------------
# Poisson random measure sampling
# ---------------------------------------------------------------------------


def _cell_masses_1d(f, edges, order=12):
    x, w = _gl(order)
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    vals = f(mid[:, None] + half[:, None] * x[None, :])
    return half * (np.asarray(vals, dtype=float) @ w)


def _support_edges(a, b, cells=4000, window=40.0):
    """Grid edges covering [a, b] (b possibly infinite) for cdf inversion."""
    if math.isinf(b):
        # base window plus geometric extension; tail mass beyond is negligible
        base = np.linspace(a, a + window, cells + 1)
        ext = a + window * 2.0 ** np.linspace(0.0, 8.0, 257)[1:]
        return np.concatenate([base, ext])
    return np.linspace(a, b, cells + 1)


class _Sampler1D:
    def __init__(self, f, a, b):
        self.edges = _support_edges(a, b)
        self.masses = np.maximum(_cell_masses_1d(f, self.edges), 0.0)
        self.total = float(self.masses.sum())
        self.cum = np.concatenate([[0.0], np.cumsum(self.masses)])

    def sample(self, rng, size):
        u = rng.random(size) * self.total
        idx = np.searchsorted(self.cum, u, side="right") - 1
        idx = np.clip(idx, 0, len(self.masses) - 1)
        lo, hi = self.edges[idx], self.edges[idx + 1]
        frac = (u - self.cum[idx]) / np.maximum(self.masses[idx], 1e-300)
        return lo + np.clip(frac, 0.0, 1.0) * (hi - lo)


class _Sampler2D:
    def __init__(self, f, rect, cells=220, window=40.0):
        (a1, b1), (a2, b2) = rect
        self.ex = _support_edges(a1, b1, cells, window)
        self.ey = _support_edges(a2, b2, cells, window)
        x, w = _gl(8)
        mx = 0.5 * (self.ex[:-1] + self.ex[1:])
        hx = 0.5 * (self.ex[1:] - self.ex[:-1])
        my = 0.5 * (self.ey[:-1] + self.ey[1:])
        hy = 0.5 * (self.ey[1:] - self.ey[:-1])
        gx = mx[:, None] + hx[:, None] * x[None, :]
        gy = my[:, None] + hy[:, None] * x[None, :]
        gyf = gy.ravel()
        cell = np.empty((len(mx), len(my)))
        # row blocks keep the node tensor bounded in memory
        for lo in range(0, len(mx), 64):
            hi = min(lo + 64, len(mx))
            vals = f(gx[lo:hi].ravel()[:, None], gyf[None, :])
            vals = vals.reshape(hi - lo, len(x), len(my), len(x))
            cell[lo:hi] = np.einsum("a,iajb,b->ij", w, vals, w)
        cell *= np.outer(hx, hy)
        self.masses = np.maximum(cell, 0.0)
        self.total = float(self.masses.sum())
        self._flat = self.masses.ravel()
        self.cum = np.concatenate([[0.0], np.cumsum(self._flat)])

    def sample(self, rng, size):
        u = rng.random(size) * self.total
        idx = np.clip(np.searchsorted(self.cum, u, side="right") - 1, 0, self._flat.size - 1)
        i, j = np.unravel_index(idx, self.masses.shape)
        sx = self.ex[i] + rng.random(size) * (self.ex[i + 1] - self.ex[i])
        sy = self.ey[j] + rng.random(size) * (self.ey[j + 1] - self.ey[j])
        return np.column_stack([sx, sy])


class _IntensitySampler:
    """Splits an IntensitySpec into components and samples locations."""

    def __init__(self, spec):
        self.spec = spec
        self.parts = []  # (mass, draw(rng, size) -> (size, d) array)
        dim = 1 if spec.is_1d else 2
        self.dim = dim
        if spec.density is not None:
            if spec.is_1d:
                a, b = map(float, spec.region)
                s = _Sampler1D(lambda x: np.asarray(spec.density(x), float), a, b)
                self.parts.append((s.total, lambda rng, m, s=s: s.sample(rng, m)[:, None]))
            else:
                s = _Sampler2D(lambda x, y: np.asarray(spec.density(x, y), float),
                               spec.region)
                self.parts.append((s.total, lambda rng, m, s=s: s.sample(rng, m)))
        if spec.diagonal is not None:
            a1 = float(spec.region[0] if spec.is_1d else spec.region[0][0])
            b1 = float(spec.region[1] if spec.is_1d else spec.region[0][1])
            s = _Sampler1D(lambda x: np.asarray(spec.diagonal(x), float), a1, b1)

            def draw_diag(rng, m, s=s):
                pts = s.sample(rng, m)
                return np.column_stack([pts, pts]) if dim == 2 else pts[:, None]

            self.parts.append((s.total, draw_diag))
        if spec.atoms:
            locs = np.asarray([np.atleast_1d(loc) for loc, _ in spec.atoms], dtype=float)
            masses = np.asarray([m for _, m in spec.atoms], dtype=float)

            def draw_atoms(rng, m, locs=locs, masses=masses):
                idx = rng.choice(len(masses), size=m, p=masses / masses.sum())
                return locs[idx]

            self.parts.append((float(masses.sum()), draw_atoms))
        self.total = sum(m for m, _ in self.parts)

    def sample_locations(self, rng, size):
        if size == 0 or self.total <= 0:
            return np.empty((0, self.dim))
        weights = np.asarray([m for m, _ in self.parts]) / self.total
        counts = rng.multinomial(size, weights)
        chunks = [draw(rng, int(c)) for (_, draw), c in zip(self.parts, counts) if c]
        pts = np.vstack(chunks) if chunks else np.empty((0, self.dim))
        return pts[rng.permutation(len(pts))]


def sample_prm(spec, seed, stream=0, reps=None):
    """Draw from the Poisson random measure with the given mean measure.

    The point count is Poisson(total mass); locations are i.i.d. from the
    normalised intensity (numeric inverse-cdf per component; the
    off-diagonal / diagonal / atom split follows the component masses).
    With ``reps`` set, returns a list of independent configurations drawn
    from one deterministic stream (the location tables are built once).
    """
    rng = make_rng(seed, stream)
    sampler = _IntensitySampler(spec)
    if not math.isfinite(sampler.total):
        raise ValueError("intensity must have finite total mass")
    if reps is None:
        count = rng.poisson(sampler.total)
        return PointConfiguration(sampler.sample_locations(rng, int(count)))
    out = []
    counts = rng.poisson(sampler.total, int(reps))
    for count in counts:
        out.append(PointConfiguration(sampler.sample_locations(rng, int(count))))
    return out


# ---------------------------------------------------------------------------
# immigration-death process
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Event-list representation of one immigration-death path."""

    initial: PointConfiguration
    events: list  # (time, +1 | -1, point)
    horizon: float

    def configuration_at(self, t):
        pts = [tuple(p) for p in self.initial.points]
        for time, sign, point in self.events:
            if time > t:
                break
            if sign > 0:
                pts.append(tuple(point))
            else:
                pts.remove(tuple(point))
        return PointConfiguration(np.asarray(pts) if pts else ())

    def count_at(self, t):
        c = len(self.initial)
        for time, sign, _ in self.events:
            if time > t:
                break
            c += sign
        return c

    def to_records(self):
        """Line-oriented export rows: (time, event, x[, y])."""
        rows = []
        for time, sign, point in self.events:
            rows.append((time, "birth" if sign > 0 else "death", *point))
        return rows


def immigration_death_simulate(spec, initial, horizon, seed, stream=0):
    """Event-driven immigration-death path on the configuration space.

    From configuration xi the process waits Exp(|xi| + lam); with
    probability lam/(|xi| + lam) a new particle immigrates at a location
    drawn from the normalised intensity, else a uniformly chosen particle
    dies.  Equilibrium is the Poisson random measure with mean ``spec``.
    """
    rng = make_rng(seed, stream)
    sampler = _IntensitySampler(spec)
    lam = sampler.total
    pts = [tuple(p) for p in initial.points] if len(initial) else []
    t = 0.0
    events = []
    while True:
        rate = lam + len(pts)
        if rate <= 0:
            break
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            break
        if rng.random() < lam / rate:
            loc = sampler.sample_locations(rng, 1)[0]
            pts.append(tuple(loc))
            events.append((t, +1, tuple(loc)))
        else:
            victim = pts.pop(int(rng.integers(len(pts))))
            events.append((t, -1, victim))
    return Trajectory(initial=initial, events=events, horizon=float(horizon))


def immigration_death_counts(lam, times, reps, seed, initial=0, stream=0):
    """Population counts of the immigration-death process, vectorised.

    Simulates ``reps`` independent copies of the count chain (immigration
    rate ``lam``, unit per-capita death rate, ``initial`` particles) and
    records the state at each requested time.  The count chain is exactly
    the cardinality process of the spatial simulator, so its law at time t
    started empty is Poisson(lam * (1 - e**-t)).

    Returns an array of shape (len(times), reps) of integer counts.
    """
    times = np.sort(np.asarray(times, dtype=float))
    rng = make_rng(seed, stream)
    reps = int(reps)
    n_times = len(times)
    k = np.full(reps, int(initial), dtype=np.int64)
    t = np.zeros(reps)
    t_next = np.full(reps, np.inf)
    nxt = np.zeros(reps, dtype=np.int64)  # index of next time to record
    out = np.empty((n_times, reps), dtype=np.int64)
    active = np.ones(reps, dtype=bool)
    while np.any(active):
        idx = np.flatnonzero(active)
        rate = lam + k[idx]
        frozen = rate <= 0.0  # absorbing state 0 when lam == 0
        if np.any(frozen):
            for i in idx[frozen]:
                out[nxt[i]:, i] = k[i]
                nxt[i] = n_times
            active[idx[frozen]] = False
            idx = idx[~frozen]
            rate = rate[~frozen]
            if idx.size == 0:
                continue
        t_next[idx] = t[idx] + rng.exponential(1.0 / rate)
        # record the pre-jump state at every requested time inside [t, t_next)
        rec = idx
        while rec.size:
            rec = rec[nxt[rec] < n_times]
            if rec.size == 0:
                break
            rec = rec[times[nxt[rec]] < t_next[rec]]
            out[nxt[rec], rec] = k[rec]
            nxt[rec] += 1
        t[idx] = t_next[idx]
        birth = rng.random(idx.size) < lam / rate
        k[idx] += np.where(birth, 1, -1)
        active[idx] = nxt[idx] < n_times
    return out
