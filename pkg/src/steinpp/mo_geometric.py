"""Lattice exceedance process with Marshall-Olkin geometric marks.

The normalised marks live on the square lattice (L*Z+ - log n)^2 with
step L = log(1/p00).  The pipeline approximates the exceedance process
on A* = [u*, inf)^2 in three stages:

1. by the Poisson process with the lattice mean measure (total variation,
   bound e**-u* / n);
2. by a Poisson process whose piecewise-continuous intensity spreads each
   lattice point mass uniformly over its coordinate square, with the
   diagonal masses spread along the diagonal line (d2 distance);
3. by the parameter-free limit intensity obtained as p11 -> 0 under
   p10 = gamma*p11, p01 = delta*p11 (d2 and total variation).

Both continuous intensities integrate to e**-u* over [u*, inf)^2 and to
n over the full normalised quadrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import MOGeometricLaw
from .stein_bounds import BoundReport, IntensitySpec

__all__ = [
    "MOGeoScenario",
    "normalized_pmf",
    "lattice_mean_measure",
    "constructed_intensity",
    "constructed_diagonal",
    "limit_intensity_gd",
    "limit_diagonal_gd",
    "cell_mass",
    "constructed_mass",
    "constructed_spec",
    "limit_spec",
    "tilde_corner",
    "lemma_cond_check",
    "bound_ledger",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MOGeoScenario:
    """Exceedance scenario: law in (gamma, delta, p11) form, sample size n,
    and threshold u_star >= -log n for the region A* = [u_star, inf)^2."""

    gamma: float
    delta: float
    p11: float
    n: int
    u_star: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.u_star < -math.log(self.n) - 1e-12:
            raise ValueError("u_star must be >= -log n")
        # validates the parameter gate (1 + gamma + delta) * p11 < 1
        MOGeometricLaw.from_gamma_delta(self.gamma, self.delta, self.p11)

    @property
    def law(self):
        return MOGeometricLaw.from_gamma_delta(self.gamma, self.delta, self.p11)

    @property
    def step(self):
        """Lattice step L = log(1/p00)."""
        return -math.log(self.law.p00)

    @property
    def offset(self):
        return math.log(self.n)

    def to_lattice(self, k_star):
        """Back-transform a normalised coordinate to its integer index."""
        k = (np.asarray(k_star, dtype=float) + self.offset) / self.step
        ki = np.rint(k)
        if np.any(np.abs(k - ki) > 1e-9 * np.maximum(np.abs(k), 1.0) + 1e-9):
            raise ValueError("coordinate is not on the normalised lattice")
        if np.any(ki < -0.5):
            raise ValueError("lattice index must be nonnegative")
        return ki.astype(np.int64)

    def _exponents(self):
        """Branch exponents: the coefficient pairs sum to one per branch."""
        law = self.law
        lp = math.log(law.p00)
        b_upper = math.log(law.q2) / lp       # t-coefficient for s < t
        b_lower = math.log(law.q1) / lp       # s-coefficient for s > t
        return b_upper, b_lower


def normalized_pmf(scen, k_star, l_star):
    """Point mass P(X1* = k_star, X2* = l_star) on the normalised lattice."""
    k = scen.to_lattice(k_star)
    l = scen.to_lattice(l_star)
    return float(scen.law.pmf(k, l))


def lattice_mean_measure(scen, rect=None):
    """Mean measure of the exceedance process on a normalised rectangle.

    ``rect`` is ((s_lo, s_hi), (t_lo, t_hi)) in normalised coordinates
    with +inf allowed (default: the scenario's A*).  Uses the bivariate
    survival algebra, so the tail is exact (error 0 <= 1e-12).
    """
    if rect is None:
        rect = ((scen.u_star, math.inf), (scen.u_star, math.inf))
    (s_lo, s_hi), (t_lo, t_hi) = rect
    law, L, off = scen.law, scen.step, scen.offset

    def lat_ceil(x):
        return max(int(math.ceil((x + off) / L - 1e-12)), 0)

    k1 = lat_ceil(s_lo)
    l1 = lat_ceil(t_lo)
    # half-open on the right: largest lattice index strictly below the edge
    k2 = None if math.isinf(s_hi) else int(math.floor((s_hi + off) / L - 1e-12))
    l2 = None if math.isinf(t_hi) else int(math.floor((t_hi + off) / L - 1e-12))

    def surv(k, l):
        if k is None or l is None:
            return 0.0
        if k < 0 or l < 0:
            k, l = max(k, 0), max(l, 0)
        return float(law.survival(k, l))

    total = surv(k1, l1)
    if k2 is not None:
        total -= surv(k2 + 1, l1)
    if l2 is not None:
        total -= surv(k1, l2 + 1)
    if k2 is not None and l2 is not None:
        total += surv(k2 + 1, l2 + 1)
    return scen.n * max(total, 0.0)


# ---------------------------------------------------------------------------
# constructed piecewise-continuous intensity
# ---------------------------------------------------------------------------


def constructed_intensity(scen, s, t):
    """Off-diagonal intensity spreading lattice masses over their squares.

    patterned as a*b*exp(-a*s - b*t) per branch with a + b = 1; the value
    on s = t is irrelevant to any integral (taken from the s < t branch).
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    b_up, b_lo = scen._exponents()
    a_up, a_lo = 1.0 - b_up, 1.0 - b_lo
    upper = a_up * b_up * np.exp(-a_up * s - b_up * t)
    lower = a_lo * b_lo * np.exp(-b_lo * s - a_lo * t)
    return np.where(s <= t, upper, lower)


def constructed_diagonal(scen, s):
    """Diagonal intensity (projection along the s-axis): c * exp(-s)."""
    b_up, b_lo = scen._exponents()
    c = b_up + b_lo - 1.0
    return c * np.exp(-np.asarray(s, dtype=float))


def limit_intensity_gd(gamma, delta, s, t):
    """Limit off-diagonal intensity as p11 -> 0 at fixed (gamma, delta)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    tot = 1.0 + gamma + delta
    upper = gamma * (1.0 + delta) / tot**2 * np.exp(
        -(gamma / tot) * s - ((1.0 + delta) / tot) * t)
    lower = delta * (1.0 + gamma) / tot**2 * np.exp(
        -((1.0 + gamma) / tot) * s - (delta / tot) * t)
    return np.where(s <= t, upper, lower)


def limit_diagonal_gd(gamma, delta, s):
    tot = 1.0 + gamma + delta
    return np.exp(-np.asarray(s, dtype=float)) / tot


def _ray_mass(b_up, b_lo, c, u):
    """Mass of an a*b*e^{-as-bt} pair plus diagonal line over [u, inf)^2."""
    a_up, a_lo = 1.0 - b_up, 1.0 - b_lo
    return (a_up + a_lo + c) * math.exp(-u)


def constructed_mass(scen, u=None):
    """Total constructed mass over [u, inf)^2 (default the scenario A*)."""
    u = scen.u_star if u is None else u
    b_up, b_lo = scen._exponents()
    return _ray_mass(b_up, b_lo, b_up + b_lo - 1.0, u)


def cell_mass(scen, k_star, l_star):
    """Constructed-intensity mass of the coordinate square at (k*, l*).

    Includes the diagonal-line mass for diagonal cells.  By construction
    this reproduces the lattice point mass n * P(X* = (k*, l*)).
    """
    L = scen.step
    b_up, b_lo = scen._exponents()
    a_up, a_lo = 1.0 - b_up, 1.0 - b_lo
    s0, s1 = k_star, k_star + L
    t0, t1 = l_star, l_star + L

    def seg(a, x0, x1):
        return math.exp(-a * x0) - math.exp(-a * x1)

    if abs(k_star - l_star) > 1e-9:
        if k_star < l_star:
            return seg(a_up, s0, s1) * seg(b_up, t0, t1)
        return seg(b_lo, s0, s1) * seg(a_lo, t0, t1)
    # diagonal cell: two triangles plus the diagonal segment
    upper = a_up * seg(1.0, s0, s1) - math.exp(-b_up * s1) * seg(a_up, s0, s1)
    lower = a_lo * seg(1.0, s0, s1) - math.exp(-b_lo * s1) * seg(a_lo, s0, s1)
    line = (b_up + b_lo - 1.0) * seg(1.0, s0, s1)
    return upper + lower + line


def constructed_spec(scen):
    """IntensitySpec of the constructed intensity on [u*, inf)^2."""
    u = scen.u_star
    return IntensitySpec(
        region=((u, math.inf), (u, math.inf)),
        density=lambda s, t: constructed_intensity(scen, s, t),
        diagonal=lambda s: constructed_diagonal(scen, s),
    )


def limit_spec(gamma, delta, u_star):
    """IntensitySpec of the limit intensity on [u*, inf)^2."""
    return IntensitySpec(
        region=((u_star, math.inf), (u_star, math.inf)),
        density=lambda s, t: limit_intensity_gd(gamma, delta, s, t),
        diagonal=lambda s: limit_diagonal_gd(gamma, delta, s),
    )


def tilde_corner(scen):
    """Lattice-snapped corner of the largest square union inside A*."""
    L, off = scen.step, scen.offset
    return L * math.ceil((scen.u_star + off) / L - 1e-12) - off


# ---------------------------------------------------------------------------
# parameter inequalities and the three-stage ledger
# ---------------------------------------------------------------------------


def lemma_cond_check(gamma, delta, p11):
    """Evaluate the five exponent-comparison inequalities with slacks.

    Returns {name: {"holds": bool, "slack": float}} where the slack is
    the smallest margin by which the (two-sided where applicable)
    inequality holds; nonnegative slack means the inequality is satisfied.

    Only (1 + gamma + delta) * p11 < 1 is required here: the inequalities
    are pure exponent algebra and hold even where the induced cell
    probabilities would not form an admissible bivariate law.
    """
    if gamma <= 0 or delta <= 0:
        raise ValueError("gamma and delta must be positive")
    if not 0.0 < p11 < 1.0 or (1.0 + gamma + delta) * p11 >= 1.0:
        raise ValueError("need (1 + gamma + delta) * p11 < 1")
    q1 = 1.0 - (1.0 + gamma) * p11
    q2 = 1.0 - (1.0 + delta) * p11
    p00 = 1.0 - (1.0 + gamma + delta) * p11
    tot = 1.0 + gamma + delta
    shrink = 1.0 - tot * p11
    lp = math.log(p00)
    b_up = math.log(q2) / lp
    b_lo = math.log(q1) / lp

    def entry(value, lower, upper):
        slack = min(value - lower, upper - value)
        return {"holds": bool(slack >= -1e-12), "slack": float(slack),
                "value": float(value)}

    return {
        "q2_exponent": entry((1.0 + delta) / tot - b_up, 0.0,
                             gamma * p11 / shrink),
        "q1_exponent": entry((1.0 + gamma) / tot - b_lo, 0.0,
                             delta * p11 / shrink),
        "log_q2_over_p00": entry(math.log(q2 / p00), 0.0, gamma * p11 / shrink),
        "log_q1_over_p00": entry(math.log(q1 / p00), 0.0, delta * p11 / shrink),
        "step_product": entry(-lp * math.log(p00 / (q1 * q2)),
                              -math.inf, tot * p11 / shrink**2),
    }


def bound_ledger(scen):
    """Three-stage error ledger for approximating the exceedance process.

    Stage 1: process vs lattice Poisson process (dTV), e**-u*/n.
    Stage 2: lattice vs constructed intensity (d2).
    Stage 3: constructed vs limit intensity (d2; the dTV variant is kept
    in the metadata).  ``total`` sums the three stages; the coarser
    closed-form corollary total (always >= the sum) is also reported.
    """
    g, d, p11, n, u = scen.gamma, scen.delta, scen.p11, scen.n, scen.u_star
    tot = 1.0 + g + d
    shrink = 1.0 - tot * p11
    eu = math.exp(-u)
    damp = min(eu, 1.65 * math.exp(-u / 2.0))
    stage1 = eu / n
    stage2 = tot * p11 / shrink**2 * (2.0 * SQRT2 + 3.0 * damp)
    f3 = 4.0 * tot**2 * p11 / shrink**3
    stage3_d2 = damp * f3
    stage3_dtv = eu * f3
    corollary = stage1 + tot**2 * p11 / shrink**3 * (2.0 * SQRT2 + 7.0 * damp)
    report = BoundReport.from_terms(
        {"stage1_lattice_dtv": stage1,
         "stage2_discrete_to_continuous_d2": stage2,
         "stage3_parameter_limit_d2": stage3_d2},
        meta={"gamma": g, "delta": d, "p11": p11, "n": n, "u_star": u,
              "stage3_dtv": stage3_dtv, "corollary_total": corollary,
              "lattice_step": scen.step},
    )
    if corollary < report.total - 1e-12:
        raise AssertionError("corollary total fell below the stage sum")
    return report
