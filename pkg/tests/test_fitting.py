import math

import numpy as np
import pytest
from scipy import optimize, special

from citedist.distributions import ModelFamily, ModelSpec, cdf, log_pdf, sample
from citedist.fitting import (
    DegenerateDataError,
    InsufficientTailError,
    default_grid,
    fit_mle,
    ks_statistic,
    likelihood_ratio,
    scan_xmin,
    select_best,
)

FAMILIES = list(ModelFamily)


def test_pl_closed_form_recovery():
    x = sample(ModelSpec("PL", 1.0, alpha=2.5), 100_000, seed=1)
    fit = fit_mle("PL", x, 1.0)
    assert 2.45 <= fit.spec.alpha <= 2.55
    assert fit.spec.alpha == pytest.approx(1 + x.size / np.log(x).sum(), rel=1e-14)


def test_pl_closed_form_is_the_maximum():
    x = sample(ModelSpec("PL", 2.0, alpha=3.1), 5000, seed=2)
    fit = fit_mle("PL", x, 2.0)
    res = optimize.minimize_scalar(
        lambda a: -np.sum(log_pdf(ModelSpec("PL", 2.0, alpha=a), x)),
        bounds=(1.01, 10), method="bounded", options={"xatol": 1e-10},
    )
    assert res.x == pytest.approx(fit.spec.alpha, abs=1e-4)
    assert -res.fun == pytest.approx(fit.log_likelihood, rel=1e-10)


def test_exp_recovery():
    x = sample(ModelSpec("EXP", 2.0, lam=0.5), 100_000, seed=3)
    fit = fit_mle("EXP", x, 2.0)
    assert 0.49 <= fit.spec.lam <= 0.51
    assert fit.spec.lam == pytest.approx(1 / (x.mean() - 2.0), rel=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_reported_loglik_is_sum_of_log_pdf(family):
    x = sample(ModelSpec("LN", 1.0, mu=1.0, sigma=1.0), 3000, seed=4)
    fit = fit_mle(family, x, 1.0)
    assert fit.converged
    assert fit.log_likelihood == pytest.approx(np.sum(log_pdf(fit.spec, x[x >= 1.0])), rel=1e-9)
    assert fit.n_tail == int(np.sum(x >= 1.0))


@pytest.mark.parametrize("family", ["PLE", "STEX", "LN", "LNP"])
def test_numerical_fit_beats_perturbations(family):
    x = sample(ModelSpec("STEX", 1.0, lam=0.8, beta=0.6), 4000, seed=5)
    fit = fit_mle(family, x, 1.0)
    base = np.sum(log_pdf(fit.spec, x))
    params = fit.spec.params()
    for name, v in params.items():
        for f in (0.99, 1.01):
            trial = dict(params, **{name: v * f if v != 0 else 1e-3})
            try:
                spec = ModelSpec(fit.spec.family, 1.0, **trial)
            except ValueError:
                continue
            assert np.sum(log_pdf(spec, x)) <= base + 1e-7


def test_lnp_respects_positive_mu():
    x = sample(ModelSpec("LN", 1.0, mu=-2.0, sigma=1.5), 3000, seed=6)
    ln = fit_mle("LN", x, 1.0)
    lnp = fit_mle("LNP", x, 1.0)
    assert ln.spec.mu < 0
    assert lnp.spec.mu >= 1e-9
    assert lnp.log_likelihood <= ln.log_likelihood + 1e-8


def test_constant_data_is_degenerate():
    with pytest.raises(DegenerateDataError):
        fit_mle("LN", np.full(100, 3.0), 1.0)


def test_insufficient_tail():
    with pytest.raises(InsufficientTailError):
        fit_mle("PL", np.arange(1.0, 11.0), 1.0)
    with pytest.raises(InsufficientTailError):
        select_best(np.arange(1.0, 11.0))


def test_zeros_are_dropped():
    x = sample(ModelSpec("EXP", 1.0, lam=1.0), 500, seed=7)
    a = fit_mle("EXP", x, 1.0)
    b = fit_mle("EXP", np.concatenate([x, np.zeros(200)]), 1.0)
    assert a.spec == b.spec


# ---------------------------------------------------------------- KS and x_min scan


def test_ks_statistic_examples():
    spec = ModelSpec("EXP", 1.0, lam=0.7)
    n = 200
    q = 1.0 - np.log1p(-(np.arange(1, n + 1) - 0.5) / n) / 0.7
    assert ks_statistic(spec, q) <= 0.5 / n + 1e-12
    median = 1.0 + math.log(2) / 0.7
    assert ks_statistic(spec, [median]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ks_statistic(spec, [0.5])
    big = sample(spec, 100_000, seed=8)
    assert ks_statistic(spec, big) < 0.006


def test_scan_prefers_true_xmin():
    hits = 0
    for seed in range(100):
        x = sample(ModelSpec("PL", 1.0, alpha=2.5), 2000, seed=seed)
        xm, _ = scan_xmin("PLE", x, grid=[1.0, 2.0, 4.0])
        hits += xm == 1.0
    assert hits >= 90


def test_scan_finds_splice_point():
    rng = np.random.default_rng(9)
    body = rng.uniform(0.5, 10.0, 3000)
    tail = sample(ModelSpec("PL", 10.0, alpha=2.5), 3000, seed=10)
    x = np.concatenate([body, tail])
    grid = [1, 2, 4, 6, 8, 10, 13, 16, 20, 30]
    xm, fit = scan_xmin("PLE", x, grid=grid)
    assert 8 <= xm <= 13


def test_scan_singleton_grid_and_errors():
    x = sample(ModelSpec("PL", 1.0, alpha=2.5), 500, seed=11)
    xm, fit = scan_xmin("PL", x, grid=[1.5])
    assert xm == 1.5 and fit.spec.x_min == 1.5
    with pytest.raises(ValueError):
        scan_xmin("PL", x, grid=[])
    with pytest.raises(ValueError):
        scan_xmin("PL", x, grid=[1e9])


def test_default_grid():
    x = np.arange(1.0, 1001.0)
    g = default_grid(x, tail_min=50)
    assert g.size <= 200
    assert g[0] == 1.0
    assert g[-1] <= np.quantile(x, 0.9)
    assert np.all(np.diff(g) > 0)
    assert default_grid(np.array([])).size == 0


# ---------------------------------------------------------------- selection


def test_likelihood_ratio_hand_values():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    b = np.zeros(4)
    r, p = likelihood_ratio(a, b)
    d = a - b
    expect = d.sum() / (math.sqrt(4) * d.std())
    assert r == pytest.approx(expect)
    assert p == pytest.approx(special.erfc(abs(expect) / math.sqrt(2)))
    assert likelihood_ratio(a, a) == (0.0, 1.0)
    r2, p2 = likelihood_ratio(b, a)
    assert r2 == pytest.approx(-r) and p2 == pytest.approx(p)


def test_select_exp_sample():
    x = sample(ModelSpec("EXP", 1.0, lam=1.0), 10_000, seed=12)
    sel = select_best(x, x_min=1.0)
    assert sel.best is ModelFamily.EXP
    assert sel.fits[ModelFamily.PL].ks_distance > 0.1
    assert math.isfinite(sel.ple_alpha)
    assert all(f.spec.x_min == 1.0 for f in sel.fits.values())
    top = max(sel.fits, key=lambda f: sel.fits[f].log_likelihood)
    assert all(p.family_a is top for p in sel.pairwise)
    assert len(sel.pairwise) == 5


def test_select_result_serialises():
    sel = select_best(sample(ModelSpec("PL", 1.0, alpha=2.2), 2000, seed=13), x_min=1.0)
    d = sel.to_dict()
    assert d["best"] in {f.value for f in ModelFamily}
    assert set(d["fits"]) == {f.value for f in ModelFamily}
    assert d["ple_alpha"] == sel.ple_alpha


def test_permutation_invariance():
    x = sample(ModelSpec("LN", 1.0, mu=1.0, sigma=1.0), 3000, seed=14)
    rng = np.random.default_rng(15)
    ref = select_best(x, x_min="scan").to_dict()
    for _ in range(3):
        assert select_best(rng.permutation(x), x_min="scan").to_dict() == ref


@pytest.mark.parametrize("k", [0.01, 3.0, 250.0])
def test_scale_covariance(k):
    x = sample(ModelSpec("PLE", 1.0, alpha=2.0, lam=0.05), 5000, seed=16)
    base = {f: fit_mle(f, x, 1.0).spec for f in ("PL", "EXP", "PLE")}
    scaled = {f: fit_mle(f, x * k, k).spec for f in ("PL", "EXP", "PLE")}
    assert scaled["PL"].alpha == pytest.approx(base["PL"].alpha, rel=1e-6)
    assert scaled["EXP"].lam == pytest.approx(base["EXP"].lam / k, rel=1e-6)
    assert scaled["PLE"].lam == pytest.approx(base["PLE"].lam / k, rel=1e-6)
    assert scaled["PLE"].alpha == pytest.approx(base["PLE"].alpha, rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("spec", [
    ModelSpec("PL", 1.0, alpha=2.5),
    ModelSpec("EXP", 1.0, lam=1.0),
    ModelSpec("LN", 1.0, mu=1.0, sigma=1.0),
    ModelSpec("PLE", 1.0, alpha=2.3, lam=0.02),
    ModelSpec("STEX", 1.0, lam=0.5, beta=0.7),
], ids=lambda s: s.family.value)
def test_true_family_likelihood_dominance(spec):
    ranks, deficits = [], []
    for seed in range(100):
        x = sample(spec, 10_000, seed=1000 + seed)
        sel = select_best(x, x_min=1.0)
        lls = {f: r.log_likelihood for f, r in sel.fits.items()}
        order = sorted(lls, key=lambda f: -lls[f])
        ranks.append(order.index(spec.family) + 1)
        deficits.append(lls[order[0]] - lls[spec.family])
    # within noise: twice the deficit under the 99% chi-square(1) point
    assert np.mean(2 * np.asarray(deficits) < 6.635) >= 0.95
    if spec.family is not ModelFamily.PL:
        # PL is nested in PLE and approached by STEX and LN, so its rank is
        # 2-4 even when true; the rank form only makes sense for the others
        assert np.mean(ranks) <= 2.0
