"""Maximum-likelihood fitting, x_min scanning and model selection.

All fits work on the tail ``data >= x_min`` in units of ``x_min``
(``u = x / x_min``) so that estimates are covariant under rescaling of the
data.  PL and EXP have closed forms; STEX is profiled over ``beta``; PLE, LN
and LNP use a bounded Nelder-Mead search from several starts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import optimize
from scipy import special as sc

from . import _kernels
from .distributions import ModelFamily, ModelSpec, cdf, log_erfc, log_pdf

__all__ = [
    "DEFAULT_TAIL_MIN",
    "DegenerateDataError",
    "FitResult",
    "InsufficientTailError",
    "PairwiseTest",
    "SelectionError",
    "SelectionResult",
    "default_grid",
    "fit_mle",
    "ks_statistic",
    "likelihood_ratio",
    "scan_xmin",
    "select_best",
]

DEFAULT_TAIL_MIN = 50
DEFAULT_ALPHA_LEVEL = 0.1
MAX_GRID = 200

PLE_ALPHA_BOUNDS = (1.0 + 1e-6, 6.0)
PLE_LAM_BOUNDS = (1e-6, 10.0)
STEX_BETA_BOUNDS = (1e-2, 10.0)
LN_SIGMA_BOUNDS = (1e-3, 1e2)
LN_MU_SPAN = 200.0
LNP_MU_FLOOR = 1e-9

# fewer free parameters first; STEX last among the two-parameter families
PARSIMONY = {
    ModelFamily.PL: 0,
    ModelFamily.EXP: 1,
    ModelFamily.PLE: 2,
    ModelFamily.LN: 2,
    ModelFamily.LNP: 2,
    ModelFamily.STEX: 3,
}
FAMILY_ORDER = list(ModelFamily)


class InsufficientTailError(ValueError):
    pass


class DegenerateDataError(ValueError):
    """Tail with zero spread; every family's MLE sits on a boundary."""


class SelectionError(RuntimeError):
    pass


@dataclass
class FitResult:
    spec: ModelSpec
    n_tail: int
    log_likelihood: float
    ks_distance: float
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "n_tail": self.n_tail,
            "log_likelihood": self.log_likelihood,
            "ks_distance": self.ks_distance,
            "converged": self.converged,
        }


@dataclass
class PairwiseTest:
    family_a: ModelFamily
    family_b: ModelFamily
    ratio: float  # normalised; > 0 favours family_a
    p_value: float

    def to_dict(self) -> dict:
        return {"a": self.family_a.value, "b": self.family_b.value, "R": self.ratio, "p": self.p_value}


@dataclass
class SelectionResult:
    best: ModelFamily
    x_min: float
    fits: dict
    pairwise: list = field(default_factory=list)
    ple_alpha: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "best": self.best.value,
            "x_min": self.x_min,
            "ple_alpha": self.ple_alpha,
            "fits": {fam.value: fit.to_dict() for fam, fit in self.fits.items()},
            "pairwise": [p.to_dict() for p in self.pairwise],
        }


# --------------------------------------------------------------------------
# helpers


def _positive_sorted(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float).ravel()
    arr = arr[np.isfinite(arr) & (arr > 0)]
    return np.sort(arr)


def _tail(sorted_data: np.ndarray, x_min: float) -> np.ndarray:
    return sorted_data[np.searchsorted(sorted_data, x_min, side="left"):]


def _nelder_mead(fun, starts, bounds, xatol=1e-9, fatol=1e-10):
    best = None
    n_ok = 0
    for x0 in starts:
        x0 = np.clip(np.asarray(x0, dtype=float), [b[0] for b in bounds], [b[1] for b in bounds])
        res = optimize.minimize(
            fun,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": xatol, "fatol": fatol, "maxiter": 4000, "maxfev": 8000},
        )
        if np.isfinite(res.fun):
            n_ok += bool(res.success)
            if best is None or res.fun < best.fun:
                best = res
    return best, n_ok > 0


# --------------------------------------------------------------------------
# per-family estimators on a sorted tail; each returns (spec, loglik, converged)


def _fit_pl(tail, x_min):
    n = tail.size
    s_log = float(np.sum(np.log(tail / x_min)))
    alpha = 1.0 + n / s_log
    ll = n * math.log(alpha - 1.0) - n * math.log(x_min) - alpha * s_log
    return ModelSpec(ModelFamily.PL, x_min, alpha=alpha), ll, True


def _fit_exp(tail, x_min):
    n = tail.size
    excess = float(np.sum(tail - x_min))
    lam = n / excess
    ll = n * math.log(lam) - lam * excess
    return ModelSpec(ModelFamily.EXP, x_min, lam=lam), ll, True


def _fit_ple(tail, x_min, warm: Optional[ModelSpec] = None):
    # ``warm``: a nearby PLE solution; gives a single, looser local search
    n = tail.size
    u = tail / x_min
    s_logu = float(np.sum(np.log(u)))
    s_u = float(np.sum(u))
    log_xm = math.log(x_min)

    def nll(theta):
        a, log_lam = theta
        lam = math.exp(log_lam)
        return -(
            (1.0 - a) * log_lam
            - _kernels.log_uigamma(1.0 - a, lam)
            - a * s_logu / n
            - lam * s_u / n
        )

    lam_lo = math.log(PLE_LAM_BOUNDS[0] * x_min)
    lam_hi = math.log(PLE_LAM_BOUNDS[1] * x_min)
    bounds = [PLE_ALPHA_BOUNDS, (lam_lo, lam_hi)]
    a_pl = 1.0 + n / s_logu
    a0 = min(max(a_pl, 1.05), 5.9)
    starts = [
        (a0, math.log(1.0 / np.mean(u))),
        (a0, math.log(1e-3 / np.median(u))),
        (min(max(a_pl - 0.5, 1.05), 5.9), math.log(1.0 / np.median(u))),
    ]
    if warm is not None:
        res, ok = _nelder_mead(nll, [(warm.alpha, math.log(warm.lam * x_min))], bounds, xatol=1e-6, fatol=1e-9)
    else:
        res, ok = _nelder_mead(nll, starts, bounds)
    alpha, log_lam = float(res.x[0]), float(res.x[1])
    lam = math.exp(log_lam) / x_min
    ll = -n * float(res.fun) - n * log_xm
    return ModelSpec(ModelFamily.PLE, x_min, alpha=alpha, lam=lam), ll, ok and math.isfinite(ll)


def _fit_stex(tail, x_min):
    n = tail.size
    logu = np.log(tail / x_min)
    s_logu = float(np.sum(logu))
    log_xm = math.log(x_min)

    def profile(beta):
        excess = float(np.sum(np.expm1(beta * logu)))
        if not excess > 0 or not math.isfinite(excess):
            return math.inf, math.nan
        lam_s = n / excess
        # sum of lam_s * (1 - u**beta) equals -n at the profile optimum
        ll = n * math.log(beta) + n * math.log(lam_s) - n + (beta - 1.0) * s_logu
        return -ll / n, lam_s

    lo, hi = math.log(STEX_BETA_BOUNDS[0]), math.log(STEX_BETA_BOUNDS[1])
    grid = np.linspace(lo, hi, 41)
    vals = np.array([profile(math.exp(g))[0] for g in grid])
    order = np.argsort(vals, kind="stable")[:3]
    best_val, best_beta = math.inf, math.nan
    ok = False
    for idx in order:
        a = grid[max(idx - 1, 0)]
        b = grid[min(idx + 1, grid.size - 1)]
        res = optimize.minimize_scalar(
            lambda g: profile(math.exp(g))[0], bounds=(a, b), method="bounded", options={"xatol": 1e-10}
        )
        cand = [(float(res.fun), float(res.x)), (float(vals[idx]), float(grid[idx]))]
        for val, g in cand:
            if val < best_val:
                best_val, best_beta = val, math.exp(g)
        ok = ok or bool(res.success)
    _, lam_s = profile(best_beta)
    lam = lam_s / x_min ** best_beta
    ll = -n * best_val - n * log_xm
    spec = ModelSpec(ModelFamily.STEX, x_min, beta=best_beta, lam=lam)
    return spec, ll, ok and math.isfinite(ll)


def _fit_lognormal(tail, x_min, positive: bool):
    n = tail.size
    v = np.log(tail / x_min)
    s_v = float(np.sum(v))
    s_v2 = float(np.sum(v * v))
    log_xm = math.log(x_min)
    mean_v = s_v / n
    sd_v = math.sqrt(max(s_v2 / n - mean_v ** 2, 0.0))

    def nll(theta):
        mu_s, log_sig = theta
        sig = math.exp(log_sig)
        quad = (s_v2 - 2.0 * mu_s * s_v + n * mu_s * mu_s) / (2.0 * sig * sig * n)
        norm = 0.5 * math.log(2.0 / math.pi) - log_sig - float(log_erfc(-mu_s / (math.sqrt(2.0) * sig)))
        return -(norm - s_v / n - quad)

    mu_lo = LNP_MU_FLOOR - log_xm if positive else -LN_MU_SPAN
    mu_hi = max(LN_MU_SPAN, mu_lo + LN_MU_SPAN)
    sig_lo, sig_hi = math.log(LN_SIGMA_BOUNDS[0]), math.log(LN_SIGMA_BOUNDS[1])
    bounds = [(mu_lo, mu_hi), (sig_lo, sig_hi)]
    sd0 = max(sd_v, 1e-2)
    starts = [
        (mean_v, math.log(sd0)),
        (mean_v - 2.0 * sd0, math.log(1.5 * sd0)),
        (0.0, math.log(max(math.sqrt(s_v2 / n), 1e-2))),
    ]
    res, ok = _nelder_mead(nll, starts, bounds)
    mu = float(res.x[0]) + log_xm
    sigma = math.exp(float(res.x[1]))
    if positive:
        mu = max(mu, LNP_MU_FLOOR)
    ll = -n * float(res.fun) - n * log_xm
    at_floor = float(res.x[1]) <= sig_lo + 1e-6
    fam = ModelFamily.LNP if positive else ModelFamily.LN
    spec = ModelSpec(fam, x_min, mu=mu, sigma=sigma)
    return spec, ll, ok and math.isfinite(ll) and not at_floor


_FITTERS = {
    ModelFamily.PL: _fit_pl,
    ModelFamily.EXP: _fit_exp,
    ModelFamily.PLE: _fit_ple,
    ModelFamily.STEX: _fit_stex,
    ModelFamily.LN: lambda t, xm: _fit_lognormal(t, xm, positive=False),
    ModelFamily.LNP: lambda t, xm: _fit_lognormal(t, xm, positive=True),
}


def _check_tail(tail: np.ndarray, x_min: float, tail_min: int) -> None:
    if tail.size < max(int(tail_min), 1):
        raise InsufficientTailError(
            f"insufficient tail: {tail.size} observations >= x_min={x_min:g}, need {tail_min}"
        )
    if tail[-1] <= tail[0] or tail[-1] <= x_min:
        raise DegenerateDataError(f"tail above x_min={x_min:g} has zero spread")


def _fit_sorted(family: ModelFamily, tail: np.ndarray, x_min: float, warm=None) -> FitResult:
    if warm is not None and family is ModelFamily.PLE:
        spec, ll, ok = _fit_ple(tail, float(x_min), warm=warm)
    else:
        spec, ll, ok = _FITTERS[family](tail, float(x_min))
    ks = _kernels.ks_sorted(cdf(spec, tail))
    return FitResult(spec=spec, n_tail=int(tail.size), log_likelihood=float(ll), ks_distance=ks, converged=bool(ok))


# --------------------------------------------------------------------------
# public API


def fit_mle(family, data, x_min: float, tail_min: int = DEFAULT_TAIL_MIN) -> FitResult:
    """Fit one family to ``data >= x_min`` by maximum likelihood.

    Zeros and negative values are dropped first; the models are supported
    on ``x >= x_min > 0``.

    Raises
    ------
    InsufficientTailError
        fewer than ``tail_min`` observations at or above ``x_min``.
    DegenerateDataError
        the tail has no spread (e.g. constant data).
    """
    family = ModelFamily(family)
    if not x_min > 0:
        raise ValueError("x_min must be positive")
    tail = _tail(_positive_sorted(data), x_min)
    _check_tail(tail, x_min, tail_min)
    return _fit_sorted(family, tail, x_min)


def ks_statistic(spec: ModelSpec, data) -> float:
    """Largest gap between the empirical tail CDF and the model CDF."""
    tail = _tail(np.sort(np.asarray(data, dtype=float).ravel()), spec.x_min)
    if tail.size == 0:
        raise ValueError(f"no observations >= x_min={spec.x_min:g}")
    return _kernels.ks_sorted(cdf(spec, tail))


def default_grid(data, tail_min: int = DEFAULT_TAIL_MIN, max_points: int = MAX_GRID) -> np.ndarray:
    """Distinct values up to the 90th percentile, thinned to ``max_points``.

    Points leaving fewer than ``tail_min`` observations are dropped.
    """
    x = _positive_sorted(data)
    if x.size == 0:
        return x
    cut = np.quantile(x, 0.9)
    uniq = np.unique(x[x <= cut])
    n_above = x.size - np.searchsorted(x, uniq, side="left")
    uniq = uniq[n_above >= tail_min]
    if uniq.size > max_points:
        idx = np.unique(np.round(np.linspace(0, uniq.size - 1, max_points)).astype(int))
        uniq = uniq[idx]
    return uniq


def scan_xmin(
    family,
    data,
    grid: Optional[Sequence[float]] = None,
    tail_min: int = DEFAULT_TAIL_MIN,
) -> tuple[float, FitResult]:
    """Pick the grid point whose fit has the smallest KS distance.

    Ties go to the smaller x_min.  Grid points whose tail is too small or
    degenerate are skipped.  PLE fits along the grid are warm-started from
    the previous point; the chosen point is refitted from scratch.
    """
    family = ModelFamily(family)
    x = _positive_sorted(data)
    pts = default_grid(x, tail_min) if grid is None else np.asarray(sorted(set(float(g) for g in grid)))
    if pts.size == 0:
        raise ValueError("empty x_min grid")
    best: Optional[tuple[float, FitResult]] = None
    warm = None
    for xm in pts:
        if not xm > 0:
            continue
        tail = _tail(x, xm)
        try:
            _check_tail(tail, xm, tail_min)
            fit = _fit_sorted(family, tail, xm, warm=warm)
        except (InsufficientTailError, DegenerateDataError):
            continue
        if not (fit.converged and math.isfinite(fit.ks_distance)):
            warm = None
            continue
        warm = fit.spec
        if best is None or fit.ks_distance < best[1].ks_distance:
            best = (float(xm), fit)
    if best is None:
        raise ValueError("x_min scan failed: no grid point produced a converged fit")
    if family is ModelFamily.PLE:
        tail = _tail(x, best[0])
        best = (best[0], _fit_sorted(family, tail, best[0]))
    return best


def likelihood_ratio(ll_a: np.ndarray, ll_b: np.ndarray) -> tuple[float, float]:
    """Normalised log-likelihood ratio and two-sided p-value.

    ``R = sum(ll_a - ll_b) / (sqrt(n) * sd)``; under the null of equal fit
    R is asymptotically standard normal.  Zero spread gives ``(0, 1)``.
    """
    d = np.asarray(ll_a, dtype=float) - np.asarray(ll_b, dtype=float)
    n = d.size
    sd = float(np.std(d))
    if n == 0 or not sd > 0:
        return 0.0, 1.0
    r = float(np.sum(d)) / (math.sqrt(n) * sd)
    return r, math.erfc(abs(r) / math.sqrt(2.0))


XminPolicy = Union[None, str, float]


def select_best(
    data,
    x_min: XminPolicy = "scan",
    tail_min: int = DEFAULT_TAIL_MIN,
    alpha_level: float = DEFAULT_ALPHA_LEVEL,
    grid: Optional[Sequence[float]] = None,
) -> SelectionResult:
    """Fit all six families on one common tail and pick the winner.

    ``x_min`` is either a number (fixed) or ``"scan"``, which takes the
    KS-optimal point of a PLE scan.  Families are ranked by log-likelihood;
    every family whose likelihood is not significantly worse than the top
    one (p > ``alpha_level``) competes on parsimony, then likelihood.
    """
    x = _positive_sorted(data)
    if x_min is None or (isinstance(x_min, str) and x_min == "scan"):
        if x.size < tail_min:
            raise InsufficientTailError(f"insufficient tail: {x.size} positive observations, need {tail_min}")
        xm, _ = scan_xmin(ModelFamily.PLE, x, grid=grid, tail_min=tail_min)
    else:
        xm = float(x_min)
    tail = _tail(x, xm)
    _check_tail(tail, xm, tail_min)

    fits = {fam: _fit_sorted(fam, tail, xm) for fam in FAMILY_ORDER}
    ranked = sorted(
        (f for f in FAMILY_ORDER if fits[f].converged and math.isfinite(fits[f].log_likelihood)),
        key=lambda f: (-fits[f].log_likelihood, FAMILY_ORDER.index(f)),
    )
    if len(ranked) < 2:
        raise SelectionError(f"only {len(ranked)} families converged")

    pointwise = {f: log_pdf(fits[f].spec, tail) for f in ranked}
    top = ranked[0]
    pairwise = []
    contenders = [top]
    for other in ranked[1:]:
        r, p = likelihood_ratio(pointwise[top], pointwise[other])
        pairwise.append(PairwiseTest(top, other, r, p))
        if p > alpha_level:
            contenders.append(other)
    best = min(contenders, key=lambda f: (PARSIMONY[f], -fits[f].log_likelihood, FAMILY_ORDER.index(f)))
    return SelectionResult(
        best=best,
        x_min=xm,
        fits=fits,
        pairwise=pairwise,
        ple_alpha=float(fits[ModelFamily.PLE].spec.alpha),
    )
