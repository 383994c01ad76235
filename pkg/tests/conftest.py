import math

import numpy as np
import pytest
from scipy import integrate, stats

from paoi_lab import (
    Deterministic,
    Erlang,
    Exponential,
    HyperExponential,
    LogNormal,
    Pareto,
    ShiftedExponential,
    TwoPoint,
)

# One representative per catalog kind; parameters chosen so every kind has
# a comfortable quantile range for grid-based checks.
CATALOG = {
    "exponential": Exponential(rate=1.0),
    "erlang": Erlang(shape=3, rate=1.0),
    "pareto": Pareto(xm=1.0, alpha=2.0),
    "shifted-exponential": ShiftedExponential(shift=0.5, rate=2.0),
    "two-point": TwoPoint(t1=1.0, t2=3.0, p=0.5),
    "hyper-exponential": HyperExponential(rates=(10.0, 1.0), weights=(10 / 11, 1 / 11)),
    "log-normal": LogNormal(mu=0.0, sigma=1.0),
    "deterministic": Deterministic(value=1.5),
}

CONTINUOUS = [
    "exponential",
    "erlang",
    "pareto",
    "shifted-exponential",
    "hyper-exponential",
    "log-normal",
]

FINITE_MEAN = [k for k in CATALOG if not math.isinf(CATALOG[k].mean())]


def catalog_ids():
    return sorted(CATALOG)


@pytest.fixture(params=catalog_ids())
def member(request):
    return CATALOG[request.param]


def scipy_frozen(name):
    """Independent scipy.stats counterpart for continuous catalog members."""
    d = CATALOG[name]
    if name == "exponential":
        return stats.expon(scale=1.0 / d.rate)
    if name == "erlang":
        return stats.gamma(d.shape, scale=1.0 / d.rate)
    if name == "pareto":
        return stats.pareto(d.alpha, scale=d.xm)
    if name == "shifted-exponential":
        return stats.expon(loc=d.shift, scale=1.0 / d.rate)
    if name == "log-normal":
        return stats.lognorm(d.sigma, scale=math.exp(d.mu))
    raise KeyError(name)


def hyperexp_pdf(d, x):
    return sum(w * r * math.exp(-r * x) for w, r in zip(d.weights, d.rates))


def pdf_of(name):
    d = CATALOG[name]
    if name == "hyper-exponential":
        return lambda x: hyperexp_pdf(d, x)
    frozen = scipy_frozen(name)
    return frozen.pdf


def quad_truncated_moment(name, theta):
    """Brute-force oracle for E[X 1{X <= theta}] on continuous kinds."""
    pdf = pdf_of(name)
    lo = CATALOG[name].support_min()
    if theta <= lo:
        return 0.0
    val, _ = integrate.quad(lambda x: x * pdf(x), lo, theta, limit=400)
    return val


def quad_integrated_cdf(name, theta):
    """Brute-force oracle for int_0^theta F on continuous kinds."""
    d = CATALOG[name]
    lo = d.support_min()
    if theta <= lo:
        return 0.0
    val, _ = integrate.quad(d.cdf, lo, theta, limit=400)
    return val


def theta_probe_grid(d, n=20, q_lo=0.05, q_hi=0.95):
    """Representative thresholds inside the support of ``d``."""
    return np.array([d.quantile(q) for q in np.linspace(q_lo, q_hi, n)])


def ks_statistic(samples, cdf):
    """Kolmogorov-Smirnov distance of an empirical sample against ``cdf``.

    Valid for distributions with atoms: the supremum is checked at every
    observed value from both sides, using a left limit for the jump.
    """
    xs = np.asarray(samples, dtype=float)
    n = len(xs)
    values, counts = np.unique(xs, return_counts=True)
    cum = np.cumsum(counts)
    worst = 0.0
    for v, c_le, c in zip(values, cum, counts):
        v = float(v)
        f_right = cdf(v)
        f_left = cdf(v - 1e-9 * max(1.0, abs(v)))
        worst = max(
            worst,
            abs(c_le / n - f_right),
            abs((c_le - c) / n - f_left),
        )
    return worst
