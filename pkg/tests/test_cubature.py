import math

import numpy as np
import pytest

from lowdisc.cubature import (
    Integrand,
    IntegrandError,
    TransformSpec,
    clt_sample_size,
    estimate_with_control,
    gaussian_inv_cdf,
    keister_integrand,
    keister_reference,
    sample_mean,
    stop_clt_iid,
    stop_qmc_clt,
)
from lowdisc.sampling import Sampler, replication_samplers
from lowdisc.seqgen import digital_points, sobol_spec

mpmath = pytest.importorskip("mpmath")


def mp_keister(d: int) -> float:
    """Radial form evaluated with mpmath's tanh-sinh quadrature."""
    mpmath.mp.dps = 30
    radial = mpmath.quad(lambda r: mpmath.cos(r) * mpmath.exp(-r * r) * r ** (d - 1), [0, mpmath.inf])
    return float(2 * mpmath.pi ** (mpmath.mpf(d) / 2) / mpmath.gamma(mpmath.mpf(d) / 2) * radial)


def test_sample_mean_trivial():
    const = Integrand(lambda x: np.full(x.shape[0], 3.25), 2)
    assert sample_mean(const, np.random.default_rng(0).random((17, 2))) == 3.25
    ident = Integrand(lambda x: x[:, 0], 1)
    assert sample_mean(ident, np.array([[0.0], [0.5]])) == 0.25


def test_sample_mean_reports_nan_index():
    f = Integrand(lambda x: np.where(x[:, 0] > 0.7, np.nan, 1.0), 1)
    with pytest.raises(IntegrandError) as err:
        sample_mean(f, np.array([[0.1], [0.2], [0.9]]))
    assert err.value.index == 2


def test_sample_mean_dimension_mismatch():
    with pytest.raises(ValueError):
        sample_mean(Integrand(lambda x: x[:, 0], 2), np.zeros((3, 3)))


def test_gaussian_inv_cdf_center_and_endpoints():
    assert gaussian_inv_cdf(0.5) == 0.0
    assert gaussian_inv_cdf(0.975) == pytest.approx(1.959964, abs=1e-6)
    with pytest.raises(ValueError):
        gaussian_inv_cdf(0.0)


def test_keister_center_values():
    assert keister_integrand(6)(np.full((1, 6), 0.5))[0] == pytest.approx(math.pi ** 3, rel=1e-15)
    assert keister_integrand(1)(np.array([[0.5]]))[0] == pytest.approx(math.sqrt(math.pi), rel=1e-15)


def test_keister_rejects_boundary_points():
    with pytest.raises(ValueError):
        keister_integrand(2)(np.zeros((1, 2)))


def test_keister_reference_values():
    assert keister_reference(6) == pytest.approx(-2.327303729298, abs=1e-11)
    assert keister_reference(1) == pytest.approx(math.sqrt(math.pi) * math.exp(-0.25), abs=1e-12)


@pytest.mark.parametrize("d", range(1, 13))
def test_keister_reference_against_mpmath(d):
    assert keister_reference(d) == pytest.approx(mp_keister(d), abs=1e-9)


def test_keister_reference_range():
    for d in (0, 13):
        with pytest.raises(ValueError):
            keister_reference(d)


def test_keister_reference_agrees_with_high_n_qmc():
    f = keister_integrand(6)
    means = [sample_mean(f, s.points(2 ** 14)) for s in replication_samplers("sobol", 6, "digital_shift", 5, 16)]
    se = np.std(means, ddof=1) / math.sqrt(len(means))
    assert abs(np.mean(means) - keister_reference(6)) <= 3 * se


def test_transform_identity():
    ts = TransformSpec("gaussian_inv_cdf", 1 / math.sqrt(2))
    f = ts.compose(lambda t: np.exp(-t[:, 0] ** 2), 1)
    est = np.mean([sample_mean(f, s.points(2 ** 14)) for s in replication_samplers("sobol", 1, "digital_shift", 0, 4)])
    assert est == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    with pytest.raises(ValueError):
        TransformSpec("log")


def test_transform_is_increasing():
    u = np.linspace(0.01, 0.99, 99)
    assert np.all(np.diff(TransformSpec("gaussian_inv_cdf", 2.0).apply(u)) > 0)


def test_control_variate_identities():
    x = np.random.default_rng(1).random((100, 1))
    f = Integrand(lambda x: x[:, 0], 1)
    zero = Integrand(lambda x: np.zeros(x.shape[0]), 1)
    assert estimate_with_control(f, zero, x) == sample_mean(f, x)
    ctrl = Integrand(lambda x: x[:, 0] - 0.5, 1)
    assert estimate_with_control(f, ctrl, x) == 0.5
    with pytest.raises(ValueError):
        estimate_with_control(f, Integrand(lambda x: x[:, 0], 2), x)


def test_control_variate_reduces_variance():
    f = Integrand(lambda x: x[:, 0] ** 2, 1)
    ctrl = Integrand(lambda x: x[:, 0] - 0.5, 1)
    wins = 0
    for s in range(50):
        gen = np.random.default_rng(1000 + s)
        plain, cv = [], []
        for _ in range(40):
            x = gen.random((64, 1))
            plain.append(sample_mean(f, x))
            cv.append(estimate_with_control(f, ctrl, x))
        wins += np.var(cv) < np.var(plain)
    assert wins >= 45


def test_clt_sample_size_arithmetic():
    assert clt_sample_size(1.0, 0.01, 0.05) == math.ceil((2 * 1.959963984540054 / 0.01) ** 2) == 153659
    # with the quantile rounded to 1.96 the same formula gives 153664
    assert math.ceil((2 * 1.96 / 0.01) ** 2) == 153664


def test_iid_rule_constant_integrand():
    f = Integrand(lambda x: np.full(x.shape[0], 7.0), 2)
    res = stop_clt_iid(f, 0.01, n0=64)
    assert res.n == 64 and res.estimate == 7.0 and res.half_width == 0.0


def test_iid_rule_flags_budget():
    f = Integrand(lambda x: x[:, 0], 1)
    res = stop_clt_iid(f, 1e-5, n_max=1000)
    assert not res.guaranteed and res.n == 1000
    with pytest.raises(ValueError):
        stop_clt_iid(f, 0.0)


def test_iid_rule_coverage():
    f = Integrand(lambda x: x[:, 0], 1)
    hits = sum(abs(stop_clt_iid(f, 0.005, seed=s).estimate - 0.5) <= 0.005 for s in range(200))
    assert hits >= 0.93 * 200


def test_qmc_rule_constant_integrand():
    f = Integrand(lambda x: np.full(x.shape[0], -1.5), 3)
    res = stop_qmc_clt(f, 1e-6, n_init=32)
    assert res.n == 32 and res.half_width == 0.0 and res.estimate == -1.5
    assert res.evaluations == res.n * res.replications


def test_qmc_rule_never_re_evaluates():
    calls = []

    def g(x):
        calls.append(x.shape[0])
        return np.cos(x.sum(axis=1))

    f = Integrand(g, 3)
    res = stop_qmc_clt(f, 1e-7, R=4, n_init=16, n_max=2 ** 12)
    assert sum(calls) == res.n * res.replications == res.evaluations
    assert not res.guaranteed


def test_qmc_rule_input_validation():
    f = Integrand(lambda x: x[:, 0], 1)
    with pytest.raises(ValueError):
        stop_qmc_clt(f, 0.1, R=1)
    with pytest.raises(ValueError):
        stop_qmc_clt(f, 0.1, n_init=100)
    with pytest.raises(ValueError):
        stop_qmc_clt(f, 0.1, randomize="none")


def test_qmc_rule_lattice_family():
    f = keister_integrand(3)
    res = stop_qmc_clt(f, 1e-3, family="lattice", randomize="shift", seed=2)
    assert abs(res.estimate - keister_reference(3)) <= 3 * res.half_width


def test_unbiased_single_replication():
    f = Integrand(lambda x: x[:, 0] * x[:, 1], 2)
    est = np.array([sample_mean(f, Sampler("sobol", 2, "digital-shift", s).points(16)) for s in range(2000)])
    assert abs(est.mean() - 0.25) <= 3 * est.std(ddof=1) / math.sqrt(est.size)


def test_unrandomized_gaussian_transform_is_hard_error():
    with pytest.raises(ValueError):
        sample_mean(keister_integrand(2), digital_points(sobol_spec(2), 4))
