import math

import numpy as np
import pytest

from spindeph import closedforms as cf
from spindeph import thermal
from spindeph.engine import WitnessEvaluator
from spindeph.model import InfiniteRange, NearestNeighborRing1D, PowerLawRing1D, ensemble_from_model


def test_binomial_table_pascal_and_reference():
    table = cf.BinomialTable(40)
    for n in range(41):
        for k in range(n + 1):
            assert table.choose(n, k) == math.comb(n, k)
    assert table.choose(5, 7) == 0
    with pytest.raises(ValueError):
        table.choose(41, 2)


def test_multiplicity_examples():
    assert cf.multiplicity_sum_si(2, 1) == 2
    assert cf.multiplicity_sum_si(4, 2) == 6
    for p in range(1, 31):
        assert sum(cf.multiplicity_sum_si(p, k) for k in range(p + 1)) == 2**p


def test_chu_vandermonde_identity_exact():
    assert cf.chu_vandermonde_exponent(2, 1) == 4
    assert cf.chu_vandermonde_exponent(3, 0) == 20
    for r_n in range(1, 31):
        for q in range(r_n + 1):
            brute = sum(math.comb(r_n, k) * math.comb(r_n, k - q) for k in range(q, r_n + 1))
            assert cf.chu_vandermonde_exponent(r_n, q) == brute


def test_nn_1d_values():
    assert cf.log_det_nn_1d(1, 1.0, np.pi / 3) == pytest.approx(math.log(1 / 16), abs=1e-14)
    assert cf.log_det_nn_1d(2, 1.0, 0.0) == 0.0
    # the divergence at odd multiples of pi/(2J) shows up as a deep dip at
    # the nearest representable float (cos(float(pi/2)) ~ 6e-17, not 0)
    assert cf.log_det_nn_1d(1, 1.0, np.pi / 2) < -140.0


def test_nn_1d_matches_engine_p2():
    spec = ensemble_from_model(NearestNeighborRing1D(j=1.0), 6, 2)
    env = thermal.maximally_mixed(4, 1)
    ts = np.linspace(0, 2 * np.pi, 500)
    ld, _ = WitnessEvaluator(spec, env).series(ts)
    assert np.max(np.abs(ld - cf.log_det_nn_1d(2, 1.0, ts))) < 1e-12


def test_nn_1d_independent_of_ring_size():
    ts = np.linspace(0.05, 6.0, 80)
    ref = cf.log_det_nn_1d(2, 1.0, ts)
    for n_total in (4, 5, 6, 7, 8):
        spec = ensemble_from_model(NearestNeighborRing1D(j=1.0), n_total, 2)
        env = thermal.maximally_mixed(n_total - 2, 1)
        ld, _ = WitnessEvaluator(spec, env).series(ts)
        assert np.max(np.abs(ld - ref)) < 1e-12


def test_sign_independence():
    ts = np.linspace(0, 5, 60)
    assert np.array_equal(cf.log_det_nn_1d(2, -1.3, ts), cf.log_det_nn_1d(2, 1.3, ts))
    assert np.array_equal(
        cf.log_det_infinite_range(8, 2, -0.9, ts), cf.log_det_infinite_range(8, 2, 0.9, ts)
    )
    assert np.array_equal(cf.log_det_2d_nn(2, -1.0, ts), cf.log_det_2d_nn(2, 1.0, ts))


def test_infinite_range_small_cases():
    ts = np.linspace(0, 4, 50)
    # N=2, p=1: two cross pairs with unit exponent
    assert np.allclose(
        cf.log_det_infinite_range(2, 1, 1.0, ts),
        2 * np.log(np.abs(np.cos(ts / 2))),
        atol=1e-14,
    )
    assert cf.log_det_infinite_range(5, 2, 1.0, 0.0) == 0.0


def test_infinite_range_double_product_reference():
    # grouped-by-difference evaluation must equal the literal double product
    rng = np.random.default_rng(1)
    for _ in range(10):
        n = int(rng.integers(3, 12))
        p = int(rng.integers(1, n))
        j = float(rng.uniform(0.2, 2.0))
        t = float(rng.uniform(0.0, 3.0))
        brute = 0.0
        for jj in range(p + 1):
            for kk in range(p + 1):
                mult = (n - p) * math.comb(p, kk) * math.comb(p, jj)
                brute += mult * np.log(np.abs(np.cos(j * t * (jj - kk) / n)))
        assert cf.log_det_infinite_range(n, p, j, t) == pytest.approx(brute, rel=1e-13, abs=1e-13)


def test_infinite_range_matches_engine():
    ts = np.linspace(0.02, 1.25, 40)
    for n, p in ((4, 1), (6, 2), (8, 2), (8, 3)):
        spec = ensemble_from_model(InfiniteRange(j=1.0), n, p)
        env = thermal.maximally_mixed(n - p, 1)
        ld, _ = WitnessEvaluator(spec, env).series(ts)
        assert np.max(np.abs(ld - cf.log_det_infinite_range(n, p, 1.0, ts))) < 1e-12


def test_infinite_range_periodicity():
    # period 2 pi N / J
    n, p, j = 6, 3, 1.0
    for t in (0.3, 1.1, 2.9):
        a = cf.log_det_infinite_range(n, p, j, t)
        b = cf.log_det_infinite_range(n, p, j, t + 2 * np.pi * n / j)
        assert a == pytest.approx(b, abs=1e-9)


def test_fraction_asymptotic_hand_value():
    # r=1/2, N=4: sum = C(4,1) + 4 C(4,0) = 8, so log det ~ -(J t)^2
    t = 0.37
    assert cf.log_det_infinite_fraction_asymptotic(4, 0.5, 1.0, t) == pytest.approx(-(t**2), abs=1e-15)
    assert cf.log_det_infinite_fraction_asymptotic(8, 0.5, 1.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        cf.log_det_infinite_fraction_asymptotic(5, 0.5, 1.0, 0.1)


def test_fraction_asymptotic_close_to_exact():
    exact = cf.log_det_infinite_range(20, 10, 1.0, 0.1)
    asym = cf.log_det_infinite_fraction_asymptotic(20, 0.5, 1.0, 0.1)
    assert abs(asym - exact) / abs(exact) < 0.10


def test_2d_values_and_exponents():
    ts = np.linspace(0.05, 1.4, 30)
    assert np.allclose(cf.log_det_2d_nn(1, 1.0, ts), 8 * np.log(np.abs(np.cos(ts))), atol=0)
    assert cf.log_det_2d_nn(2, 1.0, 0.0) == 0.0
    # q=2 exponent is 2^10
    assert cf.log_det_2d_nn(2, 1.0, 0.3) == pytest.approx(1024 * np.log(np.cos(0.3)), abs=1e-9)


def test_power_law_large_alpha_approaches_nn():
    ts = np.linspace(0.05, 2.8, 40)
    pl = cf.log_det_power_law(6, 1, alpha=50.0, j_n=1.0, t=ts)
    nn = cf.log_det_nn_1d(1, 1.0, ts)
    assert np.max(np.abs(pl - nn)) < 1e-10


def test_power_law_alpha_zero_kac_is_infinite_range():
    # alpha=0 with unit-mean-field normalization gives uniform entries
    # J/(N-1), i.e. the all-to-all structure with J' = J N/(N-1)
    n, p = 6, 2
    ts = np.linspace(0.05, 1.2, 25)
    pl = cf.log_det_power_law(n, p, alpha=0.0, j_n=1.0, t=ts, kac_normalization=True)
    ref = cf.log_det_infinite_range(n, p, n / (n - 1), ts)
    assert np.max(np.abs(pl - ref)) < 1e-11


def test_power_law_matches_engine():
    ts = np.linspace(0.05, 1.6, 30)
    spec = ensemble_from_model(PowerLawRing1D(j=0.8, alpha=3.0), 7, 2)
    env = thermal.maximally_mixed(5, 1)
    ld, _ = WitnessEvaluator(spec, env).series(ts)
    ref = cf.log_det_power_law(7, 2, alpha=3.0, j_n=0.8, t=ts)
    assert np.max(np.abs(ld - ref)) < 1e-11


def test_fixed_p_limit_decay():
    # |log det| <= C/N and decreasing toward zero with N at fixed p, Jt=1
    vals = [abs(cf.log_det_infinite_range(n, 1, 1.0, 1.0)) for n in (100, 1000, 10000)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-4


def test_fraction_limit_divergence():
    vals = [cf.log_det_infinite_range(n, n // 2, 1.0, 1.0) for n in (8, 12, 16, 20)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
