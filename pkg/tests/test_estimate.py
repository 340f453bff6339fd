import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfbm import (ModelParams, PathSampler, avar_eta, avar_hurst, avar_rho, avar_sigma2, estimate_all,
                  estimate_eta, estimate_hurst, estimate_rho, estimate_sigma2, sample_path,
                  test_time_reversibility as reversibility)
from mfbm.errors import (DegeneratePathError, InsufficientDataError, ParameterDomainError,
                         UnidentifiedError)
from mfbm.estimate import (hurst_in_range, reversibility_statistic, se_sigma2, upsilon1, upsilon2,
                           upsilon3)

BIV = ModelParams.bivariate(0.1, 0.4, rho=0.4)


@pytest.fixture(scope="module")
def paths():
    return PathSampler(BIV, 1000, 1 / 250).sample_many(42, range(300))


# ----------------------------------------------------------- estimators

def test_hurst_linear_path():
    x = np.arange(1001.0)
    H = estimate_hurst(x)
    assert H == pytest.approx(math.log(4 * 999 / 1000) / (2 * math.log(2)), abs=1e-12)
    assert not hurst_in_range(1.0) and hurst_in_range(H)


def test_hurst_degenerate_and_short():
    with pytest.raises(DegeneratePathError):
        estimate_hurst(np.tile([0.0, 1.0], 50))
    with pytest.raises(InsufficientDataError):
        estimate_hurst(np.array([0.0, 1.0, 2.0]))


def test_sigma2_brownian_and_scaling():
    x = sample_path(ModelParams([0.5], [3.0], [[1.0]]), 5000, 0.01, seed=1).values[:, 0]
    rv = np.sum(np.diff(x) ** 2)
    assert estimate_sigma2(x, 0.5, 0.01) == pytest.approx(rv / (5000 * 0.01))
    assert estimate_sigma2(x, 0.5, 0.01) == pytest.approx(3.0, rel=0.06)
    H = estimate_hurst(x)
    assert estimate_hurst(2.5 * x) == pytest.approx(H, abs=1e-13)
    assert estimate_sigma2(2.5 * x, H, 0.01) == pytest.approx(6.25 * estimate_sigma2(x, H, 0.01))


def test_rho_and_eta_trivial():
    x = sample_path(BIV, 200, 0.01, seed=2).values[:, 0]
    assert estimate_rho(x, x) == pytest.approx(1.0)
    assert estimate_rho(x, -x) == pytest.approx(-1.0)
    assert estimate_eta(x, x) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DegeneratePathError):
        estimate_rho(x, np.zeros_like(x))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.1, 10), st.floats(0.1, 10))
def test_scale_invariance_and_antisymmetry(seed, a, b):
    X = sample_path(ModelParams.bivariate(0.2, 0.45, rho=0.3, eta=0.2), 100, 0.01, seed=seed).values
    x, y = X[:, 0], X[:, 1]
    assert estimate_eta(y, x) == -estimate_eta(x, y)
    assert estimate_rho(a * x, b * y) == pytest.approx(estimate_rho(x, y), abs=1e-12)
    assert estimate_eta(a * x, b * y) == pytest.approx(estimate_eta(x, y), rel=1e-9, abs=1e-12)
    assert estimate_hurst(a * x) == pytest.approx(estimate_hurst(x), abs=1e-12)


def test_eta_unidentified_when_hsum_one():
    # increments 1,1,-1,-1,...: lag-2 QV is exactly twice lag-1 QV (H = 1/2 each),
    # so the 2^{H1+H2} - 2 factor in the denominator vanishes
    x = np.r_[0.0, np.cumsum(np.tile([1.0, 1.0, -1.0, -1.0], 25))]
    with pytest.raises(UnidentifiedError):
        estimate_eta(x, 2.0 * x)


def test_batch_matches_loop(paths):
    x, y = paths[:5, :, 0], paths[:5, :, 1]
    for k in range(5):
        assert estimate_hurst(x)[k] == estimate_hurst(x[k])
        assert estimate_eta(x, y)[k] == estimate_eta(x[k], y[k])


def test_time_scale_relabelling():
    p = ModelParams([0.3], [1.0], [[1.0]])
    x = sample_path(p, 300, 1 / 250, seed=3).values[:, 0]
    # same numbers under a different delta give the same H_hat
    assert estimate_hurst(x) == estimate_hurst(x.copy())


def test_mc_moments_match_asymptotics(paths):
    x, y = paths[:, :, 0], paths[:, :, 1]
    H1 = estimate_hurst(x)
    rho = estimate_rho(x, y)
    eta = estimate_eta(x, y)
    R = len(H1)
    for vals, truth, se in ((H1, 0.1, math.sqrt(avar_hurst(0.1) / 1000)),
                            (rho, 0.4, math.sqrt(avar_rho(0.1, 0.4, 0.4) / 1000)),
                            (eta, 0.0, math.sqrt(avar_eta(0.1, 0.4, 0.4) / 1000))):
        assert abs(vals.mean() - truth) < 3 * vals.std() / math.sqrt(R)
        assert vals.std() == pytest.approx(se, rel=0.2)


# ------------------------------------------------------------ variances

@pytest.mark.parametrize("fn,args,n,want,tol", [
    (avar_hurst, (0.1,), 500, 0.0431, 2e-4),
    (avar_hurst, (0.4,), 1000, 0.0248, 2e-4),
    (avar_rho, (0.1, 0.4, 0.0), 500, 0.0472, 2e-4),
    (avar_rho, (0.1, 0.4, 0.4), 500, 0.0394, 2e-4),
    (avar_eta, (0.1, 0.4, 0.0), 500, 0.1137, 5e-4),
    (avar_eta, (0.1, 0.4, 0.4), 1000, 0.0733, 5e-4),
])
def test_published_asymptotic_ses(fn, args, n, want, tol):
    assert math.sqrt(fn(*args) / n) == pytest.approx(want, abs=tol)


def test_avar_hurst_brownian_closed_form():
    assert avar_hurst(0.5) == pytest.approx(1 / (4 * math.log(2) ** 2), abs=1e-4)
    assert avar_rho(0.5, 0.5, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert upsilon2(0.5, 0.5) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("H1,H2,rho", [(0.1, 0.4, 0.4), (0.2, 0.6, 0.0), (0.6, 0.3, -0.5)])
def test_truncation_convergence(H1, H2, rho):
    for f in (lambda h: avar_rho(H1, H2, rho, head=h), lambda h: avar_eta(H1, H2, rho, head=h),
              lambda h: avar_hurst(H1, head=h)):
        assert abs(f(2000) - f(4000)) < 1e-8


def test_avar_symmetry_and_domain():
    assert avar_eta(0.1, 0.4, 0.3) == pytest.approx(avar_eta(0.4, 0.1, 0.3), rel=1e-12)
    assert upsilon1(0.2, 0.3) == pytest.approx(upsilon1(0.3, 0.2), rel=1e-12)
    assert np.isfinite(upsilon3(0.2, 0.3))
    with pytest.raises(ParameterDomainError):
        avar_hurst(0.75)
    with pytest.raises(ParameterDomainError):
        avar_rho(0.1, 0.8, 0.0)
    with pytest.raises(UnidentifiedError):
        avar_eta(0.45, 0.55, 0.0)


def test_sigma2_se():
    assert se_sigma2(0.1, 1.0, 500, 1 / 250) == pytest.approx(0.4756, abs=5e-4)
    assert se_sigma2(0.4, 1.0, 1000, 1 / 250) == pytest.approx(0.2741, abs=5e-4)
    assert se_sigma2(0.1, 2.0, 500, 1 / 250) == pytest.approx(2 * se_sigma2(0.1, 1.0, 500, 1 / 250))
    assert avar_sigma2(0.2, 3.0) == pytest.approx(36 * avar_hurst(0.2))


def test_ci_coverage_hurst():
    for H in (0.1, 0.4):
        X = PathSampler(ModelParams([H], [1.0], [[1.0]]), 1000, 1 / 250).sample_many(7, range(2000))
        Hh = estimate_hurst(X[:, :, 0])
        se = np.array([math.sqrt(avar_hurst(min(max(h, 1e-3), 0.749)) / 1000) for h in Hh])
        cover = np.mean(np.abs(Hh - H) <= 1.96 * se)
        assert 0.93 <= cover <= 0.97


# ---------------------------------------------------------------- tests

def test_reversibility_trivial_and_flags():
    x = sample_path(BIV, 500, 1 / 250, seed=4).values[:, 0]
    t = reversibility(x, x, 0.05)
    assert t.statistic == 0 and not t.reject and t.p_value == 1.0
    with pytest.raises(ParameterDomainError):
        reversibility(x, x, 1.5)
    lin = np.arange(501.0) + 0.01 * x
    assert reversibility(lin, x).out_of_theory


def test_reversibility_statistic_formula():
    s = reversibility_statistic(1000, -0.1, 0.1, 0.4, 0.4)
    assert s == pytest.approx(math.sqrt(1000) * 0.1 / math.sqrt(avar_eta(0.1, 0.4, 0.4)))


# --------------------------------------------------------------- report

def test_estimate_all_report():
    path = sample_path(BIV, 1000, 1 / 250, seed=5)
    rep = estimate_all(path, alpha=0.01)
    c0, c1 = rep.components
    (pr,) = rep.pairs
    assert abs(c0.H_hat - 0.1) < 3 * c0.se_H and abs(c1.H_hat - 0.4) < 3 * c1.se_H
    assert abs(pr.rho_hat - 0.4) < 3 * pr.se_rho and abs(pr.eta_hat) < 3 * pr.se_eta
    assert 0 <= pr.p_value <= 1 and pr.reject == (pr.statistic > 2.5758293)
    assert rep.to_csv() == estimate_all(path, alpha=0.01).to_csv()
    csv = rep.to_csv("config: test").splitlines()
    assert csv[0] == "# config: test" and csv[1].startswith("method,kind")
    assert len(csv) == 5
    txt = rep.render_text()
    assert "Ticker" in txt and "Not reject" in txt
    ci = rep.confidence_intervals(0.95)
    lo, hi = ci[("H", 0)]
    assert lo < c0.H_hat < hi and hi - lo == pytest.approx(2 * 1.959964 * c0.se_H, rel=1e-6)
    np.testing.assert_allclose(rep.eta_matrix(), -rep.eta_matrix().T)
    assert rep.rho_matrix()[0, 1] == pr.rho_hat


def test_estimate_all_univariate():
    rep = estimate_all(sample_path(ModelParams([0.3], [1.0], [[1.0]]), 100, 0.1, seed=0))
    assert rep.pairs == [] and len(rep.components) == 1
    assert "Asymmetry" not in rep.render_text()
