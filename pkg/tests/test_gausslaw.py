import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

import oracles
from polytv import gausslaw
from polytv.errors import InputError, NotApplicableError
from polytv.gausslaw import (Law, cdf, char_fn, density, density_on_grid, kolmogorov_distance,
                             sample, tv_distance, weighted_sup_norm, weighted_sup_norm_pair)
from polytv.quadpoly import CanonicalForm, QuadPoly, canonicalize

CHI1 = CanonicalForm(((1.0, 0.0),))
CHI2 = CanonicalForm(((1.0, 0.0), (1.0, 0.0)))
CHI3 = CanonicalForm(((1.0, 0.0),) * 3)
NORMAL = CanonicalForm((), sigma=1.0)


def _random_cf(rng, terms, sigma=None):
    lam = rng.choice([-1.0, 1.0], terms) * 10.0 ** rng.uniform(-1, 0.5, terms)
    delta = rng.normal(0, 1, terms)
    if sigma is None:
        sigma = float(rng.uniform(0, 1)) if rng.random() < 0.5 else 0.0
    return CanonicalForm(tuple(zip(lam, delta)), sigma, float(rng.normal()))


# -- characteristic function ----------------------------------------------------

def test_char_fn_examples():
    t = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(char_fn(CHI1, t), (1 - 2j * t) ** -0.5, rtol=1e-14)
    np.testing.assert_allclose(np.abs(char_fn(CHI1, t)), (1 + 4 * t * t) ** -0.25, rtol=1e-14)
    np.testing.assert_allclose(char_fn(NORMAL, t), np.exp(-t * t / 2), rtol=1e-14)
    assert char_fn(CHI3, 0.0) == 1.0


@settings(max_examples=50)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 5))
def test_char_fn_properties(seed, terms):
    rng = np.random.default_rng(seed)
    cf = _random_cf(rng, terms)
    t = rng.normal(0, 10, 20)
    phi = char_fn(cf, t)
    assert char_fn(cf, 0.0) == 1.0
    assert np.all(np.abs(phi) <= 1 + 1e-15)
    np.testing.assert_allclose(char_fn(cf, -t), np.conj(phi), rtol=1e-12, atol=1e-300)


def test_char_fn_matches_monte_carlo():
    cf = CanonicalForm(((0.7, 0.4), (-0.3, 1.1)), sigma=0.2, offset=0.5)
    x = sample(cf.to_quadpoly(), 200_000, 11)
    for t in [0.3, 1.0, 2.5]:
        assert abs(np.mean(np.exp(1j * t * x)) - char_fn(cf, t)) < 5 / math.sqrt(200_000)


# -- CDF and density ------------------------------------------------------------

@pytest.mark.parametrize("k", range(1, 7))
def test_chi_square_cdf(k):
    cf = CanonicalForm(((1.0, 0.0),) * k)
    xs = np.linspace(0, 20, 81)
    expected = np.array([oracles.chi2_cdf(x, k) for x in xs])
    np.testing.assert_allclose(cdf(cf, xs), expected, atol=1e-7)


def test_cdf_examples():
    x = np.linspace(0, 15, 31)
    np.testing.assert_allclose(cdf(CHI2, x), 1 - np.exp(-x / 2), atol=1e-7)
    assert cdf(CHI3, 3.0) == pytest.approx(oracles.regularized_lower_gamma(1.5, 1.5), abs=1e-7)
    cf = CanonicalForm(((2.0, 0.3), (-1.0, 0.0)), offset=1.0)
    scale = math.sqrt(cf.variance())
    assert cdf(cf, cf.offset - 10 * scale) < 1e-6


def test_degenerate_cdf_is_a_step():
    cf = CanonicalForm((), offset=2.0)
    np.testing.assert_array_equal(cdf(cf, [1.0, 2.0, 3.0]), [0.0, 1.0, 1.0])


def test_noncentral_and_indefinite_against_scipy():
    from scipy import stats
    x = np.linspace(0, 40, 81)
    cf = CanonicalForm(((1.0, 1.0),) * 4)
    np.testing.assert_allclose(cdf(cf, x), stats.ncx2.cdf(x, 4, 4.0), atol=1e-9)
    cf = CanonicalForm(((2.0, 0.7),), offset=-1.0)
    np.testing.assert_allclose(cdf(cf, x), stats.ncx2.cdf((x + 1) / 2, 1, 0.49), atol=1e-9)


def test_cdf_monotone_with_limits(rng):
    for _ in range(5):
        law = Law(_random_cf(rng, 3))
        lo, hi = law.support_range()
        xs = np.linspace(lo, hi, 400)
        vals = law.cdf(xs)
        assert np.all(np.diff(vals) >= -1e-12)
        assert vals[0] < 1e-6 and vals[-1] > 1 - 1e-6


def test_quantile_inverts_cdf():
    law = Law(CHI3)
    q = law.quantile([0.1, 0.5, 0.9])
    np.testing.assert_allclose(law.cdf(q), [0.1, 0.5, 0.9], atol=1e-12)


def test_density_examples():
    assert density(CHI3, 1.0) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), abs=1e-6)
    x = np.linspace(0.05, 20, 200)
    np.testing.assert_allclose(density(CHI3, x), oracles.chi2_3_pdf(x), atol=1e-6)
    sym = CanonicalForm(((1.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (-1.0, 0.0)))
    x = np.linspace(0.1, 6, 30)
    np.testing.assert_allclose(density(sym, x), density(sym, -x), atol=1e-6)
    x = np.linspace(-6, 6, 41)
    np.testing.assert_allclose(density(NORMAL, x), np.exp(-x * x / 2) / math.sqrt(2 * math.pi),
                               atol=1e-8)


def test_density_rejects_non_integrable():
    with pytest.raises(NotApplicableError, match="non-integrable"):
        density(CanonicalForm(((1.0, 0.0), (-1.0, 0.0))), 0.5)


def test_density_on_grid_invariants():
    grid = np.linspace(-2, 25, 2001)
    gd = density_on_grid(CHI3, grid)
    assert np.all(gd.pdf >= 0)
    assert np.all(np.diff(gd.cdf) >= -1e-12)
    assert abs(integrate.trapezoid(gd.pdf, grid) - gd.mass_captured) < 1e-4
    with pytest.raises(InputError):
        density_on_grid(CHI3, [1.0, 0.5])


# -- distances ------------------------------------------------------------------

def test_tv_identical_and_disjoint():
    est = tv_distance(CHI3, CHI3)
    assert est.lower == est.value == 0.0
    est = tv_distance(CHI3, CHI3.shifted(100.0))
    assert est.value >= 0.9999 and est.lower >= 0.9999


def test_tv_shift_against_fixed_grid_oracle():
    h = 0.05
    expected = oracles.fixed_grid_shift_tv(oracles.chi2_3_pdf, h, 0.0, 60.0)
    est = tv_distance(CHI3.shifted(h), CHI3)
    assert est.value == pytest.approx(expected, abs=1e-3)
    assert est.lower <= est.value <= 1 + 1e-9


def test_tv_non_integrable_lower_estimate():
    g = CanonicalForm(((1.0, 0.0), (-1.0, 0.0)))
    for h in [0.1, 0.01]:
        est = tv_distance(g.shifted(h), g)
        assert est.value is None and not est.converged
        assert est.lower == pytest.approx(oracles.product_difference_tv(h), rel=1e-6)


def test_tv_degenerate_cases():
    atom = CanonicalForm((), offset=1.0)
    assert tv_distance(atom, CHI3).lower == 1.0
    assert tv_distance(atom, atom).lower == 0.0
    assert tv_distance(atom, atom.shifted(1.0)).value == 1.0


def test_tv_symmetry_and_triangle(rng):
    a, b, c = (_random_cf(rng, 3, sigma=0.3) for _ in range(3))
    ab, ba = tv_distance(a, b), tv_distance(b, a)
    assert ab.value == pytest.approx(ba.value, abs=1e-9)
    bc, ac = tv_distance(b, c), tv_distance(a, c)
    assert ac.value <= ab.value + bc.value + 1e-4


def test_kolmogorov_examples():
    assert kolmogorov_distance(CHI3, CHI3) == 0.0
    assert kolmogorov_distance(CHI1, CHI1.shifted(100.0)) == pytest.approx(1.0, abs=1e-9)
    h = 0.1
    assert kolmogorov_distance(NORMAL, NORMAL.shifted(h)) == pytest.approx(
        oracles.normal_shift_kolmogorov(h), abs=1e-5)
    atom = CanonicalForm((), offset=0.0)
    assert kolmogorov_distance(atom, NORMAL) == pytest.approx(0.5)


def test_kolmogorov_below_tv(rng):
    for _ in range(3):
        a, b = _random_cf(rng, 4), _random_cf(rng, 4)
        assert kolmogorov_distance(a, b) <= tv_distance(a, b).best() + 1e-9


# -- sampling -------------------------------------------------------------------

def test_sampling_determinism_and_empty():
    f = QuadPoly.from_quad(np.eye(3), [0.1, 0.0, 0.2], 1.0)
    np.testing.assert_array_equal(sample(f, 1000, 5), sample(f, 1000, 5))
    assert not np.array_equal(sample(f, 1000, 5), sample(f, 1000, 6))
    assert sample(f, 0, 1).size == 0


def test_sampler_mean_chi_square():
    f = QuadPoly.from_quad(np.eye(3))
    x = sample(f, 1_000_000, 2024)
    assert abs(x.mean() - 3.0) <= 4 * math.sqrt(6 / 1e6)


def test_standard_normal_stream_prefix_stable():
    a = gausslaw.standard_normal_matrix(10, 3, 9)
    b = gausslaw.standard_normal_matrix(20, 3, 9)
    np.testing.assert_array_equal(a, b[:10])


def test_sampler_against_inversion_dkw(rng):
    n, alpha = 100_000, 1e-3
    eps = oracles.dkw_epsilon(n, alpha)
    for i in range(20):
        cf = _random_cf(rng, int(rng.integers(3, 6)))
        x = np.sort(sample(cf.to_quadpoly(), n, 1000 + i))
        f_theory = Law(cf).cdf(x)
        emp_hi = np.arange(1, n + 1) / n
        emp_lo = np.arange(0, n) / n
        assert max(np.max(emp_hi - f_theory), np.max(f_theory - emp_lo)) <= eps


# -- weighted sup norms -----------------------------------------------------------

def test_weighted_sup_examples():
    assert weighted_sup_norm(QuadPoly(np.zeros((2, 2)), np.zeros(2), 1.0)) == pytest.approx(1.0)
    x1sq = QuadPoly.from_quad(np.diag([1.0, 0.0]))
    assert weighted_sup_norm(x1sq) == pytest.approx(4 / math.e, rel=1e-6)
    x1 = QuadPoly(np.zeros((2, 2)), [1.0, 0.0])
    assert weighted_sup_norm(x1) == pytest.approx(math.sqrt(2) * math.exp(-0.5), rel=1e-6)
    with pytest.raises(InputError):
        weighted_sup_norm(QuadPoly.zero(3))


def test_weighted_sup_pair_rotation_invariant():
    l1 = QuadPoly(np.zeros((2, 2)), [1.0, 0.0])
    l2 = QuadPoly(np.zeros((2, 2)), [0.0, 1.0])
    assert weighted_sup_norm_pair(l1, l2) == pytest.approx(math.sqrt(2) * math.exp(-0.5), rel=1e-6)


def test_canonical_law_matches_polynomial_samples(rng):
    f = QuadPoly(np.array([[1.0, 0.3, 0.0], [0.3, -0.5, 0.1], [0.0, 0.1, 0.0]]),
                 [0.2, -0.4, 0.7], 0.3)
    cf = canonicalize(f)
    x = np.sort(sample(f, 50_000, 3))
    emp = np.arange(1, x.size + 1) / x.size
    assert np.max(np.abs(Law(cf).cdf(x) - emp)) < oracles.dkw_epsilon(x.size, 1e-3) + 1 / x.size
