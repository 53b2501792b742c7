"""Volatility proxies, leave-one-out rescaling, and parametric fits.

The two fitted families are the modified inverse gamma (maximum likelihood on
positive samples) and the generalized stretched exponential (nonlinear least
squares against a kernel density estimate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from firmgrowth.analysis import DensityEstimate, binned_volatility_moments, loglog_ols
from firmgrowth.distributions import GseParams, MigParams, gse_pdf

_ADJ = np.sqrt(np.pi / 2.0)


# ---------------------------------------------------------------------------
# Volatility proxies
# ---------------------------------------------------------------------------

def mad_volatility(growth_rates):
    """Adjusted mean absolute deviation: sqrt(pi/2) * mean |g - gbar|.

    The sqrt(pi/2) factor makes the statistic an unbiased estimate of the
    standard deviation under Gaussian sampling.
    """
    g = np.asarray(growth_rates, dtype=float)
    if g.size < 2:
        raise ValueError("need at least 2 observations")
    return float(_ADJ * np.mean(np.abs(g - g.mean())))


def sd_volatility(growth_rates):
    """Sample standard deviation (denominator n - 1)."""
    g = np.asarray(growth_rates, dtype=float)
    if g.size < 2:
        raise ValueError("need at least 2 observations")
    return float(g.std(ddof=1))


def leave_one_out_rescale(series):
    """Standardize each element with mean and adjusted MAD of the others.

    Element t becomes (g_t - mean_{-t}) / mad_{-t}, where both statistics are
    computed on the series with element t removed (the mean inside the MAD is
    the leave-one-out mean as well).  Elements whose leave-one-out MAD is zero
    come back as NaN; needs at least 3 observations.
    """
    g = np.asarray(series, dtype=float)
    n = g.size
    if n < 3:
        raise ValueError("need at least 3 observations")
    loo_mean = (g.sum() - g) / (n - 1)
    # sum over t' of |g_t' - m| via sorted prefix sums, O(n log n) overall
    srt = np.sort(g)
    pref = np.concatenate(([0.0], np.cumsum(srt)))
    below = np.searchsorted(srt, loo_mean, side="right")
    abs_sum = (
        loo_mean * below - pref[below] + (pref[n] - pref[below]) - loo_mean * (n - below)
    )
    own = np.abs(g - loo_mean)
    mad = _ADJ * (abs_sum - own) / (n - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mad > 0, (g - loo_mean) / mad, np.nan)


# ---------------------------------------------------------------------------
# Fit results
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    params: dict
    standard_errors: dict | None
    objective: float
    n_obs: int
    converged: bool

    def to_dict(self):
        return {
            "params": self.params,
            "se": self.standard_errors,
            "objective": self.objective,
            "n_obs": self.n_obs,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# Modified inverse gamma maximum likelihood
# ---------------------------------------------------------------------------

def _mig_nll(theta, x):
    a, b, m = theta
    if a <= 0 or b <= 0 or m < 0:
        return np.inf
    y = x + m
    log_c = b * np.log(a) - special.gammaln(b)
    if m > 0:
        p_low = special.gammainc(b, a / m)
        if p_low <= 0:
            return np.inf
        log_c -= np.log(p_low)
    val = -(x.size * log_c) + (1.0 + b) * np.log(y).sum() + a * (1.0 / y).sum()
    return val if np.isfinite(val) else np.inf


def _moment_init(x):
    m0 = 0.5 * x.min()
    w = 1.0 / (x + m0)
    mw, vw = w.mean(), w.var()
    if vw <= 0:
        return np.array([1.0, 1.0, m0])
    return np.array([mw / vw, mw * mw / vw, m0])


def _numeric_hessian(fun, theta, rel_step=1e-4, lower=None):
    k = theta.size
    h = rel_step * np.maximum(np.abs(theta), 1e-3)
    if lower is not None:
        # keep every difference point feasible when a parameter sits on a
        # bound (diagonal terms step 2h below the base point)
        theta = np.maximum(theta, np.asarray(lower) + 2.0 * h)
    hess = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k); ei[i] = h[i]
            ej = np.zeros(k); ej[j] = h[j]
            f_pp = fun(theta + ei + ej)
            f_pm = fun(theta + ei - ej)
            f_mp = fun(theta - ei + ej)
            f_mm = fun(theta - ei - ej)
            hess[i, j] = hess[j, i] = (f_pp - f_pm - f_mp + f_mm) / (4 * h[i] * h[j])
    return hess


def fit_mig_mle(samples, init: MigParams | None = None) -> FitResult:
    """Maximum likelihood fit of the modified inverse gamma law.

    Initialized by the method of moments on 1/(x + m0) with m0 at half the
    sample minimum, then refined by bounded L-BFGS-B with central-difference
    gradients.  Standard errors come from the inverse numeric Hessian of the
    negative log likelihood at the optimum and are reported only when the
    optimizer converged.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 100:
        raise ValueError("need at least 100 samples")
    if np.any(x <= 0):
        raise ValueError("samples must be positive")

    theta0 = (
        np.array([init.scale, init.shape, init.location])
        if init is not None
        else _moment_init(x)
    )
    nll0 = _mig_nll(theta0, x)
    bounds = [(1e-8, None), (1e-8, None), (0.0, None)]
    res = optimize.minimize(
        _mig_nll,
        theta0,
        args=(x,),
        method="L-BFGS-B",
        jac="3-point",
        bounds=bounds,
        options={"maxiter": 500, "finite_diff_rel_step": 1e-6},
    )
    theta = np.where(res.fun <= nll0, res.x, theta0)
    objective = float(min(res.fun, nll0))
    converged = bool(res.success and res.fun <= nll0)

    names = ("scale", "shape", "location")
    se = None
    if converged:
        # a location estimate on its boundary has no Wald standard error:
        # differentiate the likelihood over the interior parameters only
        free = [0, 1] if theta[2] < 1e-9 else [0, 1, 2]

        def nll_free(sub):
            full = theta.copy()
            full[free] = sub
            return _mig_nll(full, x)

        hess = _numeric_hessian(nll_free, theta[free], lower=[1e-8, 1e-8, 0.0][: len(free)])
        try:
            cov = np.linalg.inv(hess)
            diag = np.diag(cov)
            if np.all(diag > 0):
                se = {names[i]: float(np.sqrt(d)) for i, d in zip(free, diag)}
            else:
                converged = False
        except np.linalg.LinAlgError:
            converged = False
    return FitResult(
        params=dict(zip(names, map(float, theta))),
        standard_errors=se,
        objective=objective,
        n_obs=int(x.size),
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Generalized stretched exponential least squares
# ---------------------------------------------------------------------------

_GSE_WINDOW = 8.0


def _gse_vector(theta, x):
    c, u, v, w, z = theta
    denom = 2.0 * u * u * (1.0 + (np.abs(x) / w) ** (2.0 - z))
    return c * np.exp(-((x - v) ** 2) / denom)


def _gse_init(x, y):
    peak = int(np.argmax(y))
    c0 = max(float(y[peak]), 1e-6)
    v0 = float(x[peak])
    mass = np.trapezoid(y, x)
    if mass > 0:
        p = y / mass
        mean = np.trapezoid(x * p, x)
        u0 = _ADJ * np.trapezoid(np.abs(x - mean) * p, x)
    else:
        u0 = 1.0
    u0 = max(u0, 1e-3)
    return np.array([c0, u0, v0, 2.0 * u0, 1.0])


def fit_gse_nls(density: DensityEstimate, init: GseParams | None = None) -> FitResult:
    """Least-squares fit of the stretched-exponential family to a density.

    The fit runs on the grid points inside [-8, 8]; the estimate's grid must
    cover that window.  Standard errors use the Gauss-Newton approximation
    at the optimum.  If the optimizer fails to converge the best iterate is
    still returned, flagged as not converged.
    """
    grid = density.grid
    if grid[0] > -_GSE_WINDOW + 1e-9 or grid[-1] < _GSE_WINDOW - 1e-9:
        raise ValueError(f"grid must cover [-{_GSE_WINDOW}, {_GSE_WINDOW}]")
    sel = (grid >= -_GSE_WINDOW) & (grid <= _GSE_WINDOW)
    x, y = grid[sel], density.values[sel]

    if init is not None:
        theta0 = np.array(
            [init.amplitude, init.core_width, init.center, init.crossover, init.stretch]
        )
    else:
        theta0 = _gse_init(x, y)
    lo = np.array([1e-6, 1e-6, -np.inf, 1e-6, 0.0])
    hi = np.array([np.inf, np.inf, np.inf, np.inf, 2.0])
    theta0 = np.clip(theta0, lo, hi)

    res = optimize.least_squares(
        lambda t: _gse_vector(t, x) - y,
        theta0,
        jac="3-point",
        bounds=(lo, hi),
        method="trf",
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=500 * theta0.size,
    )
    sse = float(2.0 * res.cost)
    converged = res.status > 0

    names = ("amplitude", "core_width", "center", "crossover", "stretch")
    se = None
    if converged and x.size > 5:
        jac = res.jac
        sigma2 = sse / (x.size - 5)
        try:
            cov = sigma2 * np.linalg.pinv(jac.T @ jac)
            diag = np.diag(cov)
            se = dict(zip(names, np.sqrt(np.maximum(diag, 0.0))))
        except np.linalg.LinAlgError:
            se = None
    return FitResult(
        params=dict(zip(names, map(float, res.x))),
        standard_errors=se,
        objective=sse,
        n_obs=int(x.size),
        converged=bool(converged),
    )


def gse_params_from_fit(fit: FitResult) -> GseParams:
    p = fit.params
    return GseParams(p["amplitude"], p["core_width"], p["center"], p["crossover"], p["stretch"])


# ---------------------------------------------------------------------------
# Gaussian mass and exponent profiles
# ---------------------------------------------------------------------------

def gaussian_mass_fraction(density: DensityEstimate, w):
    """Probability mass of the estimated density inside [-w, w].

    Trapezoid integration with the boundary values interpolated at exactly
    -w and w; the result is clipped to [0, 1].
    """
    if not w > 0:
        raise ValueError("w must be positive")
    grid, vals = density.grid, density.values
    if grid[0] > -w or grid[-1] < w:
        raise ValueError(f"grid does not cover [-{w}, {w}]")
    inner = (grid > -w) & (grid < w)
    xs = np.concatenate(([-w], grid[inner], [w]))
    ys = np.concatenate(([np.interp(-w, grid, vals)], vals[inner], [np.interp(w, grid, vals)]))
    return float(np.clip(np.trapezoid(ys, xs), 0.0, 1.0))


def power_law_exponent_profile(sizes, vols, q_list, n_bins=25):
    """Log-log OLS slope of every requested volatility moment against size.

    Composes equal-count binning, per-bin moments and the scaling fit; the
    headline comparison table of the toolkit.  Returns {q: ScalingFit}.
    """
    stats = binned_volatility_moments(sizes, vols, q_list, n_bins=n_bins)
    sizes_b = np.array([b.mean_size for b in stats])
    out = {}
    for q in q_list:
        moments = np.array([b.moments[q] for b in stats])
        out[q] = loglog_ols(sizes_b, moments)
    return out
