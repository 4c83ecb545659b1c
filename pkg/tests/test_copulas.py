import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinpp._quad import integrate_interval
from steinpp.copulas import (
    ClaytonCopula,
    Comonotonic,
    Countermonotonic,
    GumbelCopula,
    Independence,
    MarshallOlkinCopula,
    copula_cdf,
    frechet_bounds_check,
    mo_copula_components,
    sample_copula,
    survival_copula_cdf,
    tail_dependence,
    tail_dependence_numeric,
)
from steinpp.distributions import MOExponentialLaw

FAMILIES = [
    Independence(),
    Comonotonic(),
    Countermonotonic(),
    GumbelCopula(2.0),
    GumbelCopula(3.5),
    ClaytonCopula(2.0),
    ClaytonCopula(0.7),
    ClaytonCopula(-0.4),
    MarshallOlkinCopula(0.35, 0.75),
    MarshallOlkinCopula(0.5, 0.5),
]

GRID = np.linspace(0.0, 1.0, 21)


class TestCdf:
    def test_independence_value(self):
        assert copula_cdf(Independence(), 0.3, 0.4) == pytest.approx(0.12)

    def test_gumbel_theta_one_degenerates(self):
        assert copula_cdf(GumbelCopula(1.0), 0.3, 0.4) == pytest.approx(0.12, rel=1e-12)

    def test_mo_branch_formula(self):
        a, b = 0.6, 0.2
        fam = MarshallOlkinCopula(a, b)
        u, v = 0.9, 0.3  # u**alpha >= v**beta
        assert u**a >= v**b
        assert copula_cdf(fam, u, v) == pytest.approx(u ** (1 - a) * v, rel=1e-14)

    def test_clayton_negative_theta_zero_region(self):
        fam = ClaytonCopula(-0.5)
        assert copula_cdf(fam, 0.05, 0.05) == 0.0

    def test_range_validation(self):
        with pytest.raises(ValueError):
            copula_cdf(Independence(), 1.2, 0.5)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: repr(f))
    def test_uniform_margins(self, fam):
        u = GRID
        assert np.allclose(fam.cdf(u, np.ones_like(u)), u, atol=1e-14)
        assert np.allclose(fam.cdf(np.ones_like(u), u), u, atol=1e-14)

    @given(theta=st.floats(1.0, 20.0),
           rect=st.tuples(st.floats(0, 1), st.floats(0, 1),
                          st.floats(0, 1), st.floats(0, 1)))
    @settings(max_examples=300, deadline=None, derandomize=True)
    def test_gumbel_rectangle_inequality_property(self, theta, rect):
        fam = GumbelCopula(theta)
        u0, u1 = sorted(rect[:2])
        v0, v1 = sorted(rect[2:])
        mass = (fam.cdf(u1, v1) - fam.cdf(u0, v1)
                - fam.cdf(u1, v0) + fam.cdf(u0, v0))
        assert float(mass) >= -1e-12

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: repr(f))
    def test_rectangle_inequality(self, fam):
        rng = np.random.default_rng(5)
        a = rng.random((10_000, 2))
        b = rng.random((10_000, 2))
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        mass = (fam.cdf(hi[:, 0], hi[:, 1]) - fam.cdf(lo[:, 0], hi[:, 1])
                - fam.cdf(hi[:, 0], lo[:, 1]) + fam.cdf(lo[:, 0], lo[:, 1]))
        assert float(mass.min()) >= -1e-12


class TestSurvivalCopula:
    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: repr(f))
    def test_identity_against_cdf(self, fam):
        u, v = np.meshgrid(GRID, GRID)
        lhs = survival_copula_cdf(fam, 1.0 - u, 1.0 - v)
        rhs = 1.0 - u - v + fam.cdf(u, v)
        assert np.allclose(lhs, rhs, atol=1e-14)

    def test_independence_self_dual(self):
        u, v = np.meshgrid(GRID, GRID)
        assert np.allclose(survival_copula_cdf(Independence(), u, v), u * v,
                           atol=1e-14)

    def test_corner(self):
        assert survival_copula_cdf(GumbelCopula(2.0), 1.0, 1.0) == pytest.approx(1.0)

    def test_mo_geometric_factorisation(self):
        # the bivariate geometric survival factors through the same copula
        # family evaluated at the marginal survival values
        from steinpp.distributions import MOGeometricLaw

        law = MOGeometricLaw(0.9, 0.8, 0.75)
        alpha = math.log(law.p00 / (law.q1 * law.q2)) / math.log(1 / law.q1)
        beta = math.log(law.p00 / (law.q1 * law.q2)) / math.log(1 / law.q2)
        fam = MarshallOlkinCopula(alpha, beta)
        for k in range(5):
            for l in range(5):
                assert float(law.survival(k, l)) == pytest.approx(
                    float(fam.cdf(law.q1**k, law.q2**l)), rel=1e-12)

    def test_mo_exponential_factorisation(self):
        # the joint survival factors through the Marshall-Olkin copula of
        # the marginal survival values
        law = MOExponentialLaw(1.0, 2.0, 0.5)
        alpha = law.nu12 / (law.nu1 + law.nu12)
        beta = law.nu12 / (law.nu2 + law.nu12)
        fam = MarshallOlkinCopula(alpha, beta)
        for y1 in (0.1, 0.5, 1.3):
            for y2 in (0.2, 0.8, 2.0):
                s1 = math.exp(-(law.nu1 + law.nu12) * y1)
                s2 = math.exp(-(law.nu2 + law.nu12) * y2)
                assert float(law.survival(y1, y2)) == pytest.approx(
                    float(fam.cdf(s1, s2)), rel=1e-12)


class TestSampling:
    def test_comonotonic_diagonal(self):
        pts = sample_copula(Comonotonic(), 1, 1000)
        assert np.all(pts[:, 0] == pts[:, 1])

    def test_countermonotonic_antidiagonal(self):
        pts = sample_copula(Countermonotonic(), 1, 1000)
        assert np.allclose(pts[:, 0] + pts[:, 1], 1.0, atol=1e-15)

    def test_zero_count(self):
        assert sample_copula(Independence(), 1, 0).shape == (0, 2)

    def test_determinism(self):
        a = sample_copula(GumbelCopula(2.0), 9, 100)
        b = sample_copula(GumbelCopula(2.0), 9, 100)
        assert np.array_equal(a, b)

    def test_mo_singular_proportion(self):
        fam = MarshallOlkinCopula(0.35, 0.75)
        pts = sample_copula(fam, 13, 100_000)
        ties = np.mean(np.abs(0.35 * np.log(pts[:, 0])
                              - 0.75 * np.log(pts[:, 1])) < 1e-9)
        assert abs(ties - fam.singular_mass) < 0.01

    @pytest.mark.parametrize("fam", [Independence(), GumbelCopula(2.0),
                                     ClaytonCopula(2.0), ClaytonCopula(-0.4),
                                     MarshallOlkinCopula(0.35, 0.75),
                                     Comonotonic(), Countermonotonic()],
                             ids=lambda f: repr(f))
    def test_empirical_cdf_consistency(self, fam):
        count = 100_000
        pts = sample_copula(fam, 37, count)
        grid = np.linspace(1 / 6, 5 / 6, 5)
        for u in grid:
            for v in grid:
                c = float(fam.cdf(u, v))
                emp = np.mean((pts[:, 0] <= u) & (pts[:, 1] <= v))
                sigma = math.sqrt(max(c * (1 - c), 1e-12) / count)
                assert abs(emp - c) <= 3 * sigma + 2e-3


class TestTailDependence:
    def test_closed_forms(self):
        assert tail_dependence(GumbelCopula(2.0))[1] == pytest.approx(2 - math.sqrt(2))
        assert tail_dependence(ClaytonCopula(2.0))[0] == pytest.approx(2 ** -0.5)
        assert tail_dependence(MarshallOlkinCopula(0.35, 0.75))[1] == pytest.approx(0.35)
        assert tail_dependence(Countermonotonic())[0] is None
        assert tail_dependence(Comonotonic()) == (1.0, 1.0)

    def test_numeric_independence(self):
        lo, up = tail_dependence_numeric(Independence())
        assert abs(lo) < 1e-6 and abs(up) < 1e-6

    def test_numeric_matches_closed_forms(self):
        for fam in [GumbelCopula(2.0), ClaytonCopula(2.0),
                    MarshallOlkinCopula(0.35, 0.75), Comonotonic(),
                    Independence(), GumbelCopula(3.5)]:
            lam_l, lam_u = tail_dependence_numeric(fam)
            ref_l, ref_u = tail_dependence(fam)
            if ref_l is not None:
                assert abs(lam_l - ref_l) < 1e-3
            if ref_u is not None:
                assert abs(lam_u - ref_u) < 1e-3

    def test_survival_swaps_coefficients(self):
        # the numeric coefficients of the survival copula swap lower/upper
        class _Swapped:
            def __init__(self, base):
                self.base = base

            def cdf(self, u, v):
                return survival_copula_cdf(self.base, u, v)

        base = ClaytonCopula(2.0)
        lam_l, lam_u = tail_dependence_numeric(_Swapped(base))
        assert abs(lam_u - 2 ** -0.5) < 1e-3
        assert abs(lam_l) < 1e-3


class TestFrechetBounds:
    def test_comonotonic_attains_upper(self):
        u, v = np.meshgrid(GRID, GRID)
        assert np.array_equal(Comonotonic().cdf(u, v), np.minimum(u, v))

    def test_countermonotonic_attains_lower(self):
        u, v = np.meshgrid(GRID, GRID)
        assert np.array_equal(Countermonotonic().cdf(u, v),
                              np.maximum(u + v - 1.0, 0.0))

    def test_gumbel_grid_passes(self):
        rep = frechet_bounds_check(GumbelCopula(3.0), np.linspace(0, 1, 50))
        assert rep["ok"]

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: repr(f))
    def test_all_families_pass(self, fam):
        assert frechet_bounds_check(fam)["ok"]


class TestMOComponents:
    def test_decomposition_sums_to_cdf(self):
        fam = MarshallOlkinCopula(0.35, 0.75)
        u, v = np.meshgrid(GRID, GRID)
        a_c, s_c = mo_copula_components(0.35, 0.75, u, v)
        assert np.allclose(a_c + s_c, fam.cdf(u, v), atol=1e-14)
        assert np.all(s_c >= -1e-15) and np.all(a_c >= -1e-15)

    def test_corner_mass(self):
        a, b = 0.35, 0.75
        _, s_c = mo_copula_components(a, b, 1.0, 1.0)
        assert float(s_c) == pytest.approx(a * b / (a + b - a * b))

    def test_zero_edge(self):
        a_c, s_c = mo_copula_components(0.4, 0.6, 0.0, 0.7)
        assert float(a_c) == 0.0 and float(s_c) == 0.0

    def test_singular_component_t_integral(self):
        # S_C(u, v) = integral_0^{min(u^a, v^b)} t**((a+b-2ab)/(ab)) dt
        a, b = 0.5, 0.5
        u = v = 0.81
        _, s_c = mo_copula_components(a, b, u, v)
        expo = (a + b - 2 * a * b) / (a * b)
        upper = min(u**a, v**b)
        val, err = integrate_interval(lambda t: t**expo, 0.0, upper)
        assert float(s_c) == pytest.approx(val, rel=1e-8)
