import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinpp.stein_bounds import (
    BoundReport,
    DtvTailError,
    IntensitySpec,
    barbour_hall_bound,
    barbour_hall_report,
    d2_two_prm_bound,
    exact_dtv_pmf,
    lecam_bound,
    local_dependence_bound,
    prm_dtv_bound,
)

LOG4PI = math.log(4 * math.pi)


def poisson_pmf(lam):
    return lambda k: math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))


def binomial_pmf(n, p):
    def pmf(k):
        if k > n:
            return 0.0
        return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1)
                        - math.lgamma(n - k + 1)
                        + k * math.log(p) + (n - k) * math.log1p(-p))

    return pmf


class TestExactDtv:
    def test_identical_laws(self):
        assert exact_dtv_pmf(poisson_pmf(1.3), poisson_pmf(1.3)) == 0.0

    def test_two_tolerances_agree(self):
        a = exact_dtv_pmf(poisson_pmf(1.0), poisson_pmf(2.0), tail_bound=1e-10)
        b = exact_dtv_pmf(poisson_pmf(1.0), poisson_pmf(2.0), tail_bound=1e-14)
        assert abs(a - b) <= 1e-10

    def test_halving_tail_bound_is_controlled(self):
        tb = 1e-6
        prev = exact_dtv_pmf(poisson_pmf(3.0), poisson_pmf(3.5), tail_bound=tb)
        for _ in range(6):
            cur = exact_dtv_pmf(poisson_pmf(3.0), poisson_pmf(3.5), tail_bound=tb / 2)
            assert abs(cur - prev) <= tb
            tb /= 2
            prev = cur

    def test_binomial_poisson_below_bound(self):
        d = exact_dtv_pmf(binomial_pmf(10, 0.1), poisson_pmf(1.0))
        bh = barbour_hall_bound([0.1] * 10)
        assert 0 < d <= bh
        # the sharp bound here is (1 - e**-1) * 0.1
        assert bh == pytest.approx((1 - math.exp(-1)) * 0.1, rel=1e-12)

    def test_array_input(self):
        emp = np.array([0.5, 0.25, 0.25])
        d = exact_dtv_pmf(emp, emp)
        assert d == 0.0

    def test_nonconvergent_tail_raises(self):
        heavy = lambda k: 0.0  # mass never accumulates
        with pytest.raises(DtvTailError):
            exact_dtv_pmf(heavy, poisson_pmf(1.0), max_terms=1000)


class TestIndicatorBounds:
    def test_lecam_values(self):
        assert lecam_bound([0.1] * 10) == pytest.approx(0.1)
        assert lecam_bound([]) == 0.0
        assert lecam_bound([0.5, 0.25]) == pytest.approx(0.3125)

    def test_lecam_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            lecam_bound([0.0, 0.5])
        with pytest.raises(ValueError):
            lecam_bound([1.0])

    def test_barbour_hall_values(self):
        assert barbour_hall_bound([0.1] * 10) == pytest.approx(
            (1 - math.exp(-1)) * 0.1)
        assert barbour_hall_bound([0.5]) == pytest.approx(
            (1 - math.exp(-0.5)) / 0.5 * 0.25)

    def test_barbour_hall_large_lambda_is_order_p(self):
        # for Bin(n, p) with large n*p the bound approaches p
        n, p = 100_000, 0.01
        assert barbour_hall_bound([p] * n) == pytest.approx(p, rel=1e-3)

    def test_report_carries_coarse_variant(self):
        rep = barbour_hall_report([0.1] * 10)
        assert rep.meta["coarse_min_variant"] == pytest.approx(0.1)
        assert rep.total <= rep.meta["coarse_min_variant"] + 1e-15

    @given(st.lists(st.floats(1e-6, 1 - 1e-6), min_size=1, max_size=40))
    @settings(max_examples=200, deadline=None, derandomize=True)
    def test_ordering_bh_below_lecam(self, ps):
        assert barbour_hall_bound(ps) <= lecam_bound(ps) + 1e-15

    def test_empty_barbour_hall_rejected(self):
        with pytest.raises(ValueError):
            barbour_hall_bound([])


def _triple_chain_dtv(n, pb):
    """Exact dtv(L(W), Poi(EW)) for the 2-dependent count
    W = sum_{i=1..n} B_i B_{i+1} B_{i+2} with B iid Bernoulli(pb).

    Exhaustive dynamic programme over (last two bits, current count); the
    state space is small enough that the count law is exact.
    """
    probs = {(a, b): np.zeros(n + 2) for a in (0, 1) for b in (0, 1)}
    for a in (0, 1):
        for b in (0, 1):
            pa = pb if a else 1 - pb
            pbit = pb if b else 1 - pb
            probs[(a, b)][0] = pa * pbit
    for _ in range(n):  # bits 3..n+2 complete the triples
        nxt = {s: np.zeros(n + 2) for s in probs}
        for (a, b), vec in probs.items():
            nxt[(b, 0)] += vec * (1 - pb)
            if a and b:
                nxt[(b, 1)][1:] += vec[:-1] * pb  # triple fires
            else:
                nxt[(b, 1)] += vec * pb
        probs = nxt
    law = sum(probs.values())
    lam = n * pb**3
    poi = poisson_pmf(lam)
    return 0.5 * sum(abs(law[k] - poi(k)) for k in range(n + 2)) \
        + 0.5 * (1 - sum(poi(k) for k in range(n + 2)))


class TestLocalDependence:
    def test_reduces_to_independent_case(self):
        rep = local_dependence_bound([0.1] * 10, [0] * 10, [0] * 10, [0] * 10)
        assert rep.total == pytest.approx(min(1.0, 1.0) * 0.1)
        assert rep.terms["weak_dependence"] == 0.0

    def test_single_indicator(self):
        rep = local_dependence_bound([0.2], [0.0], [0.0], [0.0])
        assert rep.total == pytest.approx(0.04)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            local_dependence_bound([0.1], [0.0, 0.0], [0.0], [0.0])

    def test_two_dependent_chain_dominates_exact_dtv(self):
        # W = sum of 20 triple products of consecutive iid Bernoulli bits;
        # indicators at lag <= 2 share bits, further ones are independent
        n, pb = 20, 0.45
        exact = _triple_chain_dtv(n, pb)
        p = pb**3
        ps = [p] * n
        ez, eiz = [], []
        for i in range(n):
            nbrs = [j for j in range(i - 2, i + 3) if 0 <= j < n and j != i]
            ez.append(len(nbrs) * p)
            # shared bits: lag 1 -> 4 bits, lag 2 -> 5 bits
            eiz.append(sum(pb ** (3 + abs(i - j)) for j in nbrs))
        rep = local_dependence_bound(ps, ez, eiz, [0.0] * n)
        assert 0 < exact <= rep.total
        assert rep.meta["lambda"] == pytest.approx(n * p)


class TestPrmComparisons:
    def test_equal_specs_zero(self):
        spec = IntensitySpec(region=(0.0, math.inf), density=lambda x: np.exp(-x))
        assert prm_dtv_bound(spec, spec) == pytest.approx(0.0, abs=1e-12)

    def test_region_mismatch(self):
        a = IntensitySpec(region=(0.0, math.inf), density=lambda x: np.exp(-x))
        b = IntensitySpec(region=(1.0, math.inf), density=lambda x: np.exp(-x))
        with pytest.raises(ValueError):
            prm_dtv_bound(a, b)

    def test_symmetry(self):
        a = IntensitySpec(region=(0.0, 20.0), density=lambda x: np.exp(-x))
        b = IntensitySpec(region=(0.0, 20.0), density=lambda x: 0.5 * np.exp(-0.5 * x))
        assert prm_dtv_bound(a, b) == pytest.approx(prm_dtv_bound(b, a), rel=1e-10)

    def test_scaled_family_separation(self):
        # on the family c * e**-x the L1 distance is |c1 - c2|, and it
        # vanishes only for equal parameters
        def spec(c):
            return IntensitySpec(region=(0.0, math.inf),
                                 density=lambda x: c * np.exp(-x))

        for c1, c2 in [(1.0, 1.0), (1.0, 1.5), (0.3, 2.0)]:
            assert prm_dtv_bound(spec(c1), spec(c2)) == pytest.approx(
                abs(c1 - c2), abs=1e-9)

    def test_atoms_matched_by_location(self):
        a = IntensitySpec(region=(0.0, 1.0), atoms=[(0.25, 1.0), (0.5, 2.0)])
        b = IntensitySpec(region=(0.0, 1.0), atoms=[(0.5, 1.5), (0.75, 0.5)])
        assert prm_dtv_bound(a, b) == pytest.approx(1.0 + 0.5 + 0.5)

    def test_normal_intensity_pair(self):
        # n * a_n * phi(a_n x + b_n) against e**-x on [u, inf)
        n, u = 1000, -0.5
        logn = math.log(n)
        a_n = 1.0 / math.sqrt(2 * logn)
        b_n = math.sqrt(2 * logn) - (math.log(logn) + LOG4PI) / (2 * math.sqrt(2 * logn))

        def lam_n(x):
            y = a_n * x + b_n
            return n * a_n * np.exp(-0.5 * y * y) / math.sqrt(2 * math.pi)

        spec1 = IntensitySpec(region=(u, math.inf), density=lam_n)
        spec2 = IntensitySpec(region=(u, math.inf), density=lambda x: np.exp(-x))
        value = prm_dtv_bound(spec1, spec2)
        bound = (3 * math.log(logn) + LOG4PI) ** 2 / (16 * logn) * math.exp(-u)
        assert 0 < value <= bound

    def test_cauchy_intensity_pair(self):
        n, u = 200, 0.5
        spec1 = IntensitySpec(region=(u, math.inf),
                              density=lambda x: 1.0 / ((math.pi / n) ** 2 + x**2))
        spec2 = IntensitySpec(region=(u, math.inf), density=lambda x: x**-2.0)
        value = prm_dtv_bound(spec1, spec2)
        bound = math.pi**2 / (3 * n**2 * u**3)
        assert 0 < value <= bound
        # the bound is an upper tail estimate; quadrature should get close
        assert value >= 0.5 * bound

    def test_two_dimensional_product_densities(self):
        def spec(c):
            return IntensitySpec(
                region=((0.0, math.inf), (0.0, math.inf)),
                density=lambda s, t: c * np.exp(-s - t))

        assert prm_dtv_bound(spec(1.0), spec(1.75)) == pytest.approx(
            0.75, abs=1e-6)

    def test_d2_two_prm_values(self):
        assert d2_two_prm_bound(1.0, 0.0) == 0.0
        assert d2_two_prm_bound(math.log(2.0), 0.5) == pytest.approx(0.375)
        assert d2_two_prm_bound(500.0, 1.0) == pytest.approx(2.0, abs=1e-12)

    def test_d2_validation(self):
        with pytest.raises(ValueError):
            d2_two_prm_bound(1.0, 1.5)
        with pytest.raises(ValueError):
            d2_two_prm_bound(0.0, 0.5)


class TestBoundReport:
    def test_total_is_term_sum(self):
        rep = BoundReport.from_terms({"a": 0.25, "b": 0.5}, oracle=0.1)
        assert rep.total == pytest.approx(0.75)
        assert rep.margin == pytest.approx(0.65)
        payload = rep.to_dict()
        assert payload["schema"] == 1 and payload["total"] == rep.total

    def test_json_round_trip_stable(self):
        rep = BoundReport.from_terms({"a": 1 / 3}, meta={"n": 10})
        assert rep.to_json() == rep.to_json()
