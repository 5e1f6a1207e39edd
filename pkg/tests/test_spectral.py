import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersive_bounds.admissible import AdmissibleFn
from dispersive_bounds.bounds import sigma
from dispersive_bounds.spectral import (ProblemSpec, SpectralMeasure, check_existence,
                                        check_existence_logpower, compute_CZ, dispersion_symbol,
                                        double_integral, eps0_grid, gamma_upper, increment_std,
                                        kernel_I, std_at)

from conftest import random_psd_measure

KDV = ProblemSpec((1.0,), (0.0, 1.0, 0.0, 1.0))


def one_atom(lam, g=1.0):
    return SpectralMeasure([lam], [[g]])


def test_dispersion_symbol_examples():
    assert dispersion_symbol(KDV, 1.0) == -1.0
    assert dispersion_symbol(KDV, 0.0) == 0.0
    spec = ProblemSpec((1.0, 0.5), (0, 1, 0, 1))
    # independent evaluation with numpy's polynomial class: -x^3 + 0.5 x^5
    poly = np.polynomial.Polynomial([0, 0, 0, -1.0, 0, 0.5])
    assert dispersion_symbol(spec, 2.0) == pytest.approx(poly(2.0)) == pytest.approx(8.0)


def test_kernel_examples():
    sin_spec = ProblemSpec((1.0,), (0, 1, 0, 1), kappa="sin")
    for lam in (-3.0, 0.0, 0.7, 5.0):
        assert kernel_I(KDV, 0.0, 0.0, lam) == 1.0
        assert kernel_I(sin_spec, 0.0, 0.0, lam) == 0.0
    assert kernel_I(KDV, 1.0, 1.0, 1.0) == 1.0


def test_double_integral_examples():
    assert double_integral(one_atom(0.3), lambda l, m: 1.0) == 1.0
    m = SpectralMeasure([0.0, 1.0], [[1, -0.5], [-0.5, 1]])
    assert double_integral(m, lambda l, mu: 1.0) == 3.0
    m2 = SpectralMeasure([1.0, 2.0], np.eye(2))
    assert double_integral(m2, lambda l, mu: l * mu) == 5.0


def test_compute_CZ_examples():
    z1 = AdmissibleFn.power(1.0)
    assert compute_CZ(one_atom(1.0), KDV, z1) == pytest.approx(1.0, rel=1e-15)
    assert compute_CZ(one_atom(1.0, 4.0), KDV, z1) == pytest.approx(2.0, rel=1e-15)
    assert compute_CZ(one_atom(0.0), KDV, AdmissibleFn.power(0.5)) == 0.0


@pytest.mark.parametrize("z", [AdmissibleFn.power(0.5), AdmissibleFn.log_power(2.0)], ids=str)
def test_compute_CZ_matches_double_integral(z, standard_measure):
    # hand-written double sum as the oracle
    lam, G = standard_measure.lambdas, standard_measure.cov
    u0 = z.u0
    zf = (lambda u: u ** z.param) if z.family == "power" else (lambda u: math.log1p(u) ** z.param)
    w = [zf(abs(l) / 2 + u0) + zf(abs(-l ** 3) / 2 + u0) for l in lam]
    total = sum(w[i] * w[j] * abs(G[i, j]) for i in range(2) for j in range(2))
    assert compute_CZ(standard_measure, KDV, z) == pytest.approx(math.sqrt(total), rel=1e-14)


def test_existence_examples():
    z1 = AdmissibleFn.power(1.0)
    assert check_existence(one_atom(0.0, 3.0), KDV, z1) == 0.0
    assert check_existence(one_atom(1.0), KDV, z1) == 1.0
    assert check_existence(SpectralMeasure([1.0, 2.0], np.eye(2)), KDV, z1) == 4097.0


def test_existence_logpower_examples():
    assert check_existence_logpower(one_atom(0.0, 2.0), KDV, 1.0) == 0.0
    # |l m|^3 (ln(1+l) ln(1+m))^alpha at l = m = e - 1 is (e - 1)^6
    direct = (math.e - 1) ** 3 * (math.e - 1) ** 3 * (math.log(math.e) ** 2) ** 1.0
    assert check_existence_logpower(one_atom(math.e - 1), KDV, 1.0) == pytest.approx(direct, rel=1e-13)
    assert direct == pytest.approx(25.7375014, rel=1e-8)
    assert check_existence_logpower(one_atom(1.0, 2.0), KDV, 2.0) == \
        pytest.approx(2 * math.log(2) ** 4, rel=1e-14)
    assert 2 * math.log(2) ** 4 == pytest.approx(0.4617, abs=5e-5)


def test_existence_logpower_skips_negative_atoms():
    m = SpectralMeasure([-0.5, 1.0], [[1.0, 0.2], [0.2, 2.0]])
    assert check_existence_logpower(m, KDV, 2.0) == pytest.approx(2 * math.log(2) ** 4, rel=1e-14)


def test_gamma_upper_examples():
    assert gamma_upper(one_atom(1.0), 1.0) == 1.0
    assert gamma_upper(SpectralMeasure([0.0, 1.0], [[1, -0.5], [-0.5, 1]]), 1.0) == \
        pytest.approx(math.sqrt(3), rel=1e-15)
    assert gamma_upper(one_atom(1.0, 4.0), 2.0) == 4.0


def test_increment_std_examples():
    m = one_atom(1.0)
    assert increment_std(m, KDV, 0.3, 0.4, 0.3, 0.4) == 0.0
    assert increment_std(m, KDV, 0.0, 0.0, 0.0, math.pi) == pytest.approx(2.0, rel=1e-15)
    assert increment_std(one_atom(0.0), KDV, 0.0, 0.1, 0.9, 0.7) == 0.0


def test_measure_validation():
    with pytest.raises(ValueError):
        SpectralMeasure([1.0, 2.0], [[1, 0.3], [0.2, 1]])
    with pytest.raises(ValueError):
        SpectralMeasure([1.0, 2.0], [[1, 2], [2, 1]])
    with pytest.raises(ValueError):
        SpectralMeasure([1.0], [[1, 0], [0, 1]])


def test_measure_json_round_trip(tmp_path, standard_measure):
    path = tmp_path / "m.json"
    standard_measure.save(path)
    assert json.loads(path.read_text()) == {"lambdas": [1.0, 2.0], "cov": [[1.0, 0.3], [0.3, 1.0]]}
    back = SpectralMeasure.load(path)
    np.testing.assert_array_equal(back.cov, standard_measure.cov)


def test_from_density_midpoint():
    m = SpectralMeasure.from_density(lambda l: math.exp(-l * l), -2.0, 2.0, 8)
    assert m.n_atoms == 8
    h = 0.5
    assert m.lambdas[0] == -1.75
    assert m.cov[0, 3] == pytest.approx(math.exp(-1.75 ** 2) * math.exp(-0.25 ** 2) * h * h)


def test_problem_validation():
    with pytest.raises(ValueError):
        ProblemSpec((1.0,), (1, 0, 0, 1))
    with pytest.raises(ValueError):
        ProblemSpec((1.0,), (0, 1, 0, 1), kappa="tan")
    with pytest.raises(ValueError):
        ProblemSpec((1.0,), (0, 1, 0, 1), C_y=2.0, gaussian=True)
    assert ProblemSpec((1.0,), (0, 2, 0, 3), C_y=2.0, gaussian=False).kappa_len == 3.0


# -- properties -------------------------------------------------------------------

finite = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2), shift=st.floats(0, 1))
def test_double_integral_linear_and_monotone(a, b, shift):
    m = random_psd_measure(4, seed=3)
    g1 = lambda l, mu: l * mu
    g2 = lambda l, mu: np.cos(l - mu)
    lin = double_integral(m, lambda l, mu: a * g1(l, mu) + b * g2(l, mu))
    assert lin == pytest.approx(a * double_integral(m, g1) + b * double_integral(m, g2), abs=1e-10)
    lo = double_integral(m, lambda l, mu: np.abs(l * mu))
    hi = double_integral(m, lambda l, mu: np.abs(l * mu) + shift)
    assert lo <= hi + 1e-12


@settings(max_examples=200, deadline=None)
@given(p=st.tuples(finite, finite), q=st.tuples(finite, finite), r=st.tuples(finite, finite),
       kappa=st.sampled_from(["cos", "sin"]))
def test_increment_std_is_pseudometric(p, q, r, kappa):
    m = random_psd_measure(5, seed=11)
    spec = ProblemSpec((1.0, -0.3), (0, 1, 0, 1), kappa=kappa)
    d = lambda a, b: increment_std(m, spec, a[0], a[1], b[0], b[1])
    assert d(p, q) == pytest.approx(d(q, p), abs=1e-12)
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-10


@pytest.mark.parametrize("z", [AdmissibleFn.power(1.0), AdmissibleFn.power(0.4),
                               AdmissibleFn.log_power(2.0)], ids=str)
def test_increment_std_below_sigma(z, standard_measure):
    c_z = compute_CZ(standard_measure, KDV, z)
    rng = np.random.default_rng(5)
    for t, x, t1, x1 in rng.uniform(0, 1, size=(500, 4)):
        h = max(abs(t - t1), abs(x - x1))
        lhs = KDV.C_y * increment_std(standard_measure, KDV, t, x, t1, x1)
        assert lhs <= sigma(z, KDV.C_y, c_z, h) * (1 + 1e-10)


def test_gamma_upper_dominates_pointwise_std():
    for m in (random_psd_measure(5, seed=1), SpectralMeasure([1, 2], [[1, -0.7], [-0.7, 2]])):
        tt, xx = np.meshgrid(np.linspace(0, 1, 33), np.linspace(0, 1, 33))
        for kappa in ("cos", "sin"):
            spec = ProblemSpec((1.0,), (0, 1, 0, 1), kappa=kappa)
            assert float(np.max(std_at(m, spec, tt.ravel(), xx.ravel()))) <= gamma_upper(m, 1.0)
            assert eps0_grid(m, spec, 17, 17) <= gamma_upper(m, 1.0) + 1e-12
