"""Ring recursion, wave-packet overlaps, permanents and the MC spectrum."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boseglow.errors import (NumericalBreakdown, SeedRequired, SizeLimit)
from boseglow.oracle import (RingCoefficients,
                             WavePacketConfig, mc_exclusive_spectrum, overlap,
                             permanent_direct, permanent_ryser,
                             permanent_weight, ring_compose, ring_recursion,
                             ring_seed, ring_seed_from_model)
from boseglow.params import ModelParams, derive
from boseglow.spectra import exclusive_n1_grid, kernel, kernel_table

coords = st.lists(st.floats(-30.0, 30.0), min_size=3, max_size=3).map(np.array)
momenta = st.lists(st.floats(-300.0, 300.0), min_size=3, max_size=3).map(np.array)


# ---------------------------------------------------------------------------
# ring recursion


def test_ring_seed_matches_closed_form_views(mid_density):
    _, d = mid_density
    seed = ring_seed(d)
    k1 = kernel(d, 1.0, 1)
    assert seed.a == pytest.approx(k1.an, rel=1e-12)
    assert seed.g == pytest.approx(k1.gn, rel=1e-12)
    assert seed.h == pytest.approx(k1.hn, rel=1e-12)


def test_ring_seed_from_first_principles(mid_density, pion_source):
    # the source-average reduction reproduces the closed-form order-1
    # kernel without going through gamma_plus/minus
    for params, d in (mid_density, pion_source):
        a = ring_seed(d)
        b = ring_seed_from_model(params)
        assert b.a == pytest.approx(a.a, rel=1e-12)
        assert b.g == pytest.approx(a.g, rel=1e-12)
        assert b.h == pytest.approx(a.h, rel=1e-12)


def test_ring_recursion_equals_closed_form(mid_density, pion_source):
    rng = np.random.default_rng(17)
    for params, d in (mid_density, pion_source):
        coeffs = ring_recursion(d, 1.0, 20)
        table = kernel_table(d, 1.0, 20)
        scale = math.sqrt(d.sigma_t2)
        for coeff in coeffs:
            n = coeff.n
            kern = table.kernel(n)
            for _ in range(5):
                k1 = rng.normal(0.0, scale, 3)
                k2 = rng.normal(0.0, scale, 3)
                log_ring = (math.log(coeff.h) - coeff.a * (k1 @ k1 + k2 @ k2)
                            + coeff.g * (k1 @ k2))
                log_exact = kern.log_evaluate(k1, k2)  # includes n0^n = 1
                assert abs(math.expm1(log_ring - log_exact)) < 1e-10


def test_ring_positivity_invariant(mid_density):
    _, d = mid_density
    for coeff in ring_recursion(d, 1.0, 40):
        assert coeff.a > 0.0
        assert 0.0 < coeff.g < 2.0 * coeff.a


def test_ring_breakdown_detected():
    bad = RingCoefficients(n=1, h=1.0, a=1.0, g=3.0)  # g > 2a: not integrable
    with pytest.raises(NumericalBreakdown):
        ring_compose(bad, bad)


def test_ring_asymptotics(mid_density):
    # b_n ratios converge to gamma_plus; a - g/2 tends to
    # sqrt(1+2x)/(2 sigma_T^2)
    _, d = mid_density
    coeffs = ring_recursion(d, 1.0, 40)
    b = [math.pi * c.h ** (2.0 / 3.0) for c in coeffs]
    rate = b[-2] / b[-1]
    assert rate == pytest.approx(d.gamma_plus, rel=1e-10)
    fixed_point = (coeffs[-1].a - coeffs[-1].g / 2.0) * 2.0 * d.sigma_t2
    assert fixed_point == pytest.approx(math.sqrt(1.0 + 2.0 * d.x), rel=1e-10)


# ---------------------------------------------------------------------------
# overlaps


def test_overlap_identical_is_one():
    xi = np.array([1.0, -2.0, 0.5])
    pi = np.array([100.0, 0.0, -50.0])
    assert overlap((xi, pi), (xi, pi), sigma=120.0) == 1.0


def test_overlap_decays_with_separation():
    xi = np.zeros(3)
    pi = np.zeros(3)
    values = [abs(overlap((xi, pi), (xi, pi + np.array([dp, 0, 0])), 100.0))
              for dp in (0.0, 100.0, 300.0, 800.0)]
    assert values[0] == 1.0
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-6
    far = overlap((xi, pi), (xi + np.array([80.0, 0, 0]), pi), 100.0)
    assert abs(far) < 1e-6


@given(coords, momenta, coords, momenta)
@settings(max_examples=100, deadline=None)
def test_overlap_hermitian_and_bounded(x1, p1, x2, p2):
    a = overlap((x1, p1), (x2, p2), sigma=150.0)
    b = overlap((x2, p2), (x1, p1), sigma=150.0)
    assert a == pytest.approx(b.conjugate(), rel=1e-14, abs=1e-14)
    assert abs(a) <= 1.0 + 1e-14


# ---------------------------------------------------------------------------
# permanents


def _random_config(rng, n, spread=0.3):
    # overlapping packets: centers small compared to the packet size
    xi = rng.normal(0.0, spread, (n, 3))
    pi = rng.normal(0.0, spread * 100.0, (n, 3))
    return WavePacketConfig(xi=xi, pi=pi, sigma=100.0)


def test_orthogonal_packets_weight_one():
    # far-separated packets: only the identity permutation survives
    xi = np.array([[0.0, 0.0, 0.0], [500.0, 0.0, 0.0], [0.0, 500.0, 0.0]])
    cfg = WavePacketConfig(xi=xi, pi=np.zeros((3, 3)), sigma=100.0)
    assert cfg.weight == pytest.approx(1.0, abs=1e-12)


def test_identical_packets_weight_factorial():
    for n in (2, 3, 5):
        cfg = WavePacketConfig(xi=np.zeros((n, 3)), pi=np.zeros((n, 3)), sigma=80.0)
        assert cfg.weight == pytest.approx(math.factorial(n), rel=1e-12)


def test_direct_vs_ryser_agreement():
    rng = np.random.default_rng(23)
    for n in (2, 3, 4, 5):
        cfg = _random_config(rng, n)
        a = cfg.overlap_matrix
        direct = permanent_direct(a)
        ryser = permanent_ryser(a)
        assert ryser.real == pytest.approx(direct.real, rel=1e-12)
        assert abs(ryser.imag - direct.imag) < 1e-12


def test_weight_bounds_random_configs():
    rng = np.random.default_rng(29)
    for n in (2, 3, 4, 6, 8):
        for _ in range(10):
            cfg = _random_config(rng, n, spread=rng.uniform(0.05, 3.0))
            w = cfg.weight
            assert 1.0 - 1e-9 <= w <= math.factorial(n) * (1.0 + 1e-9)


def test_overlap_matrix_psd_unit_diagonal():
    rng = np.random.default_rng(31)
    cfg = _random_config(rng, 5)
    a = cfg.overlap_matrix
    assert np.allclose(np.diag(a), 1.0)
    assert np.allclose(a, a.conj().T)
    assert np.linalg.eigvalsh(a).min() > -1e-12


def test_weight_monotone_along_coalescence_path():
    # 3 packets pulled together: every off-diagonal modulus grows toward 1
    rng = np.random.default_rng(37)
    base_xi = rng.normal(0.0, 2.0, (3, 3))
    base_pi = rng.normal(0.0, 200.0, (3, 3))
    weights = []
    for t in np.linspace(0.0, 0.95, 12):
        cfg = WavePacketConfig(xi=(1 - t) * base_xi, pi=(1 - t) * base_pi,
                               sigma=100.0)
        weights.append(cfg.weight)
    assert all(b > a for a, b in zip(weights, weights[1:]))


def test_permanent_size_limit():
    cfg = WavePacketConfig(xi=np.zeros((11, 3)), pi=np.zeros((11, 3)), sigma=90.0)
    with pytest.raises(SizeLimit):
        permanent_weight(cfg)


# ---------------------------------------------------------------------------
# Monte Carlo spectrum


@pytest.fixture(scope="module")
def mc_setup():
    params = ModelParams.from_natural(n0=1.0, x=1.0, sigma_t2=10000.0)
    return params, derive(params)


def test_mc_requires_seed(mc_setup):
    params, _ = mc_setup
    with pytest.raises(SeedRequired):
        mc_exclusive_spectrum(params, 2, 1000, seed=None)


def test_mc_multiplicity_limits(mc_setup):
    params, _ = mc_setup
    with pytest.raises(SizeLimit):
        mc_exclusive_spectrum(params, 5, 1000, seed=1)
    with pytest.raises(SizeLimit):
        mc_exclusive_spectrum(params, 1, 1000, seed=1)


def test_mc_seed_reproducible_bit_exact(mc_setup):
    params, _ = mc_setup
    a = mc_exclusive_spectrum(params, 2, 40_000, seed=99)
    b = mc_exclusive_spectrum(params, 2, 40_000, seed=99)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.errors, b.errors)
    assert a.mean_weight == b.mean_weight
    c = mc_exclusive_spectrum(params, 2, 40_000, seed=100)
    assert not np.array_equal(a.values, c.values)


def test_mc_weight_bounds(mc_setup):
    params, _ = mc_setup
    for n in (2, 3):
        mc = mc_exclusive_spectrum(params, n, 30_000, seed=5)
        assert mc.weight_min >= 1.0 - 1e-9
        assert mc.weight_max <= math.factorial(n) * (1.0 + 1e-9)


def test_mc_matches_analytic_n2(mc_setup):
    params, d = mc_setup
    mc = mc_exclusive_spectrum(params, 2, 300_000, seed=20260810)
    exact = exclusive_n1_grid(d, 1.0, 2, mc.k) / 2
    z = np.abs(mc.values - exact) / mc.errors
    assert z.max() < 4.0
    assert mc.errors[0] / mc.values[0] < 0.02


def test_mc_mean_weight_closed_form(mc_setup):
    # <perm>_2 over the source densities is 1 + (1+2x)^(-3/2)
    params, d = mc_setup
    mc = mc_exclusive_spectrum(params, 2, 300_000, seed=41)
    want = 1.0 + (1.0 + 2.0 * d.x) ** -1.5
    assert abs(mc.mean_weight - want) < 4.0 * mc.mean_weight_error
    assert mc.mean_weight_error < 0.005


def test_mc_wide_packet_limit_boltzmann_width():
    # sigma >> sqrt(mT): sigma_T ~ sigma and the spectrum is the
    # single-packet Boltzmann shape; weights stay near the orthogonal
    # floor because momentum overlaps vanish
    params = ModelParams(n0=0.5, R=3.0, T=50.0, m=139.57, sigma=3000.0)
    d = derive(params)
    mc = mc_exclusive_spectrum(params, 2, 60_000, seed=11,
                               k_grid=np.linspace(0.0, 2.0 * math.sqrt(d.sigma_t2), 9))
    shape = mc.values / mc.values[0]
    want = np.exp(-mc.k ** 2 / d.sigma_t2)
    assert np.allclose(shape, want, atol=0.02)


def test_mc_insufficient_samples(mc_setup):
    params, _ = mc_setup
    from boseglow.errors import InsufficientSamples
    with pytest.raises(InsufficientSamples):
        mc_exclusive_spectrum(params, 2, 2_000, seed=3, peak_rel_tol=1e-4)


def test_mc_pair_density_matches_exclusive_n2(mc_setup):
    # N2^(2)(0,0) from permanent-weighted sampling: the two-body matrix
    # element of the symmetrized pair state is |psi1(k1)psi2(k2) +
    # psi2(k1)psi1(k2)|^2, self-normalized by the mean weight
    from boseglow.params import HBARC
    from boseglow.spectra import exclusive_n2, momentum

    params, d = mc_setup
    sigma2 = params.sigma ** 2
    r_nat = params.R / HBARC
    mom_scale = math.sqrt(params.m * params.T)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(20260810)))

    n_samples = 600_000
    k1 = momentum(0.0, 0.0, 0.0)
    k2 = momentum(0.0, 0.0, 40.0)

    def psi(k, xi, pi):
        dkp = k[None, :] - pi
        return np.exp(-0.5 * np.sum(dkp * dkp, axis=1) / sigma2
                      - 1j * np.sum(xi * dkp, axis=1))

    num = np.zeros(2)
    wsum = 0.0
    for _ in range(3):
        b = n_samples // 3
        xi = rng.normal(0.0, r_nat, (b, 2, 3))
        pi = rng.normal(0.0, mom_scale, (b, 2, 3))
        dp = pi[:, 0] - pi[:, 1]
        dx = xi[:, 0] - xi[:, 1]
        xb = 0.5 * (xi[:, 0] + xi[:, 1])
        a12 = np.exp(-0.25 * np.sum(dp * dp, 1) / sigma2
                     - 0.25 * sigma2 * np.sum(dx * dx, 1)
                     - 1j * np.sum(xb * dp, 1))
        wsum += np.sum(1.0 + np.abs(a12) ** 2)
        for i, pair in enumerate(((k1, k1), (k1, k2))):
            amp = (psi(pair[0], xi[:, 0], pi[:, 0]) * psi(pair[1], xi[:, 1], pi[:, 1])
                   + psi(pair[0], xi[:, 1], pi[:, 1]) * psi(pair[1], xi[:, 0], pi[:, 0]))
            num[i] += np.sum(np.abs(amp) ** 2)
    pref = (math.pi * sigma2) ** -3.0
    for i, pair in enumerate(((k1, k1), (k1, k2))):
        mc_n2 = pref * num[i] / wsum
        exact = exclusive_n2(d, 1.0, 2, *pair)
        assert abs(mc_n2 / exact - 1.0) < 0.03
