"""Concrete e-statistics: Gaussian likelihood ratios and their supremum,
gamma maximum-likelihood suprema over comonotone regions, and split
likelihood-ratio (universal inference) e-values for Gaussian mixtures."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .numerics import normal_cdf


class DegenerateDataWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EProcessState:
    """Running sufficient statistics of an i.i.d. sample.

    ``s`` is the sum of observations and ``s_log`` the sum of their logs
    (only filled for positive data, used by the gamma statistics).
    """

    n: int = 0
    s: float = 0.0
    s_log: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("observation count must be nonnegative")

    def update(self, xs) -> "EProcessState":
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        s_log = self.s_log
        if xs.size and np.all(xs > 0):
            s_log += float(np.log(xs).sum())
        else:
            s_log = math.nan
        return EProcessState(self.n + xs.size, self.s + float(xs.sum()), s_log)

    @classmethod
    def from_data(cls, xs) -> "EProcessState":
        return cls().update(xs)


# --- Gaussian N(0,1) vs N(mu,1) ---------------------------------------------


def gaussian_lr_evalue(mu: float, state: EProcessState) -> float:
    return math.exp(mu * state.s - state.n * mu * mu / 2.0)


def gaussian_mixture_evalue(state: EProcessState) -> float:
    """Likelihood ratio mixed over a standard normal prior on the mean."""
    n = state.n
    return math.exp(state.s**2 / (2.0 * n + 2.0)) / math.sqrt(n + 1.0)


def gaussian_sup_stat(state: EProcessState) -> float:
    """``sup_{mu > 0}`` of the likelihood ratio: ``exp(max(S, 0)^2 / 2n)``."""
    if state.n < 1:
        raise ValueError("the supremum statistic needs at least one observation")
    sp = max(state.s, 0.0)
    return math.exp(sp * sp / (2.0 * state.n))


def gaussian_sup_type1(alpha: float) -> float:
    """Exact null probability that the supremum statistic reaches ``1/alpha``."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    return float(normal_cdf(-math.sqrt(-2.0 * math.log(alpha))))


# --- exponential families ---------------------------------------------------


@dataclass(frozen=True)
class ExpFamSpec:
    """Exponential family ``h(x) exp(eta(theta) . T(x) - A(theta))``.

    ``t_directions`` gives, per component of ``T``, +1 if it increases in
    ``x`` and -1 if it decreases.
    """

    eta: Callable[[Sequence[float]], Sequence[float]]
    t_directions: tuple
    log_partition: Callable[[Sequence[float]], float]
    param_names: tuple = ()

    def __post_init__(self):
        if any(d not in (1, -1) for d in self.t_directions):
            raise ValueError("summary-statistic directions must be +1 or -1")


def gamma_family() -> ExpFamSpec:
    """Gamma(shape a, rate b): ``eta = (a - 1, -b)``, ``T(x) = (log x, x)``."""
    return ExpFamSpec(
        eta=lambda th: (th[0] - 1.0, -th[1]),
        t_directions=(1, 1),
        log_partition=lambda th: special.gammaln(th[0]) - th[0] * math.log(th[1]),
        param_names=("shape", "rate"),
    )


def _interior_grid(lo: float, hi: float, m: int) -> np.ndarray:
    if not lo < hi:
        raise ValueError(f"empty parameter interval ({lo}, {hi})")
    u = (np.arange(m) + 0.5) / m
    if math.isinf(lo) and math.isinf(hi):
        return np.tan(np.pi * (u - 0.5))
    if math.isinf(hi):
        return lo + u / (1.0 - u)
    if math.isinf(lo):
        return hi - (1.0 - u) / u
    return lo + (hi - lo) * u


def expfam_comonotone(spec: ExpFamSpec, theta0: Sequence[float], region, points_per_dim: int = 41) -> bool:
    """Whether the one-observation likelihood ratios over ``region`` are
    monotone in ``x`` in one common direction.

    ``region`` is a sequence of open ``(lo, hi)`` intervals, one per
    parameter (``hi`` may be ``inf``). Checks the signs of the natural
    parameter differences, weighted by the monotone direction of each
    summary statistic, on a grid covering the box.
    """
    try:
        bounds = [(float(lo), float(hi)) for lo, hi in region]
    except (TypeError, ValueError):
        raise ValueError("region must be a sequence of (lo, hi) parameter intervals") from None
    if len(bounds) != len(theta0):
        raise ValueError(f"region has {len(bounds)} intervals for a {len(theta0)}-parameter family")
    eta0 = np.asarray(spec.eta(theta0), dtype=float)
    if eta0.shape != (len(spec.t_directions),):
        raise ValueError("eta and summary-statistic directions disagree in length")
    dirs = np.asarray(spec.t_directions, dtype=float)

    axes = [_interior_grid(lo, hi, points_per_dim) for lo, hi in bounds]
    up = down = True
    for theta in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(bounds)):
        signed = (np.asarray(spec.eta(theta), dtype=float) - eta0) * dirs
        up = up and bool(np.all(signed >= 0))
        down = down and bool(np.all(signed <= 0))
        if not (up or down):
            return False
    return True


# --- gamma maximum likelihood over comonotone regions ------------------------


@dataclass(frozen=True)
class GammaRegion:
    """Alternative parameter set for a gamma null ``(shape0, rate0)``.

    ``full`` is the whole positive quadrant, ``upper`` has shape > shape0
    and rate < rate0, ``lower`` has shape < shape0 and rate > rate0.
    """

    region: str
    shape0: float = 1.0
    rate0: float = 1.0

    _ALIASES = {"theta1": "full", "1": "full", "theta2": "upper", "2": "upper",
                "theta3": "lower", "3": "lower"}

    def __post_init__(self):
        name = self._ALIASES.get(str(self.region).lower(), str(self.region).lower())
        if name not in ("full", "upper", "lower"):
            raise ValueError(f"unknown gamma region {self.region!r}")
        object.__setattr__(self, "region", name)
        if not (self.shape0 > 0 and self.rate0 > 0):
            raise ValueError("null gamma parameters must be positive")

    def intervals(self):
        a0, b0 = self.shape0, self.rate0
        return {
            "full": ((0.0, math.inf), (0.0, math.inf)),
            "upper": ((a0, math.inf), (0.0, b0)),
            "lower": ((0.0, a0), (b0, math.inf)),
        }[self.region]

    def shape_search(self):
        a0 = self.shape0
        return {
            "full": (a0 * 1e-3, a0 * 1e3),
            "upper": (a0, a0 * 1e3),
            "lower": (a0 * 1e-3, a0),
        }[self.region]

    def rate_at(self, shape, xbar):
        b = shape / xbar
        if self.region == "upper":
            return np.minimum(b, self.rate0)
        if self.region == "lower":
            return np.maximum(b, self.rate0)
        return b


def _gamma_mean_loglik(a, b, xbar, mlog):
    return a * np.log(b) - special.gammaln(a) + (a - 1.0) * mlog - b * xbar


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def gamma_profile_mle(xbar, mlog, region: GammaRegion, tol: float = 1e-10):
    """Vectorised constrained gamma MLE from sufficient statistics.

    ``xbar`` and ``mlog`` are the sample means of ``x`` and ``log x``
    (arrays of any common shape). For fixed shape the optimal rate is
    ``shape/xbar`` clipped into the region; the concave profile in the
    shape is maximised by golden-section search and polished with Newton
    steps on the digamma score.
    """
    xbar = np.asarray(xbar, dtype=float)
    mlog = np.asarray(mlog, dtype=float)
    lo_s, hi_s = region.shape_search()
    lo = np.full(np.broadcast(xbar, mlog).shape, lo_s)
    hi = np.full_like(lo, hi_s)

    def prof(a):
        return _gamma_mean_loglik(a, region.rate_at(a, xbar), xbar, mlog)

    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = prof(c), prof(d)
    while np.max(hi - lo) > tol:
        left = fc >= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        d_new = np.where(left, c, lo + _GOLDEN * (hi - lo))
        c_new = np.where(left, hi - _GOLDEN * (hi - lo), d)
        fd_new = np.where(left, fc, np.nan)
        fc_new = np.where(left, np.nan, fd)
        c, d = c_new, d_new
        # one fresh evaluation per element: c on the left branch, d otherwise
        fresh = prof(np.where(left, c, d))
        fc = np.where(left, fresh, fc_new)
        fd = np.where(left, fd_new, fresh)
        if np.all(hi - lo <= tol):
            break
    a = 0.5 * (lo + hi)
    # boundary optima are common in the constrained regions; take the
    # search endpoint when it is at least as good
    for edge in (lo_s, hi_s):
        a = np.where(prof(np.full_like(a, edge)) >= prof(a), edge, a)

    # Newton polish on the profile score; keep a step only if it stays
    # inside the search box and does not lower the profile
    for _ in range(3):
        b = region.rate_at(a, xbar)
        interior = np.isclose(b, a / xbar, rtol=0, atol=0) | (region.region == "full")
        score = np.where(interior, np.log(a) - np.log(xbar), np.log(b)) - special.digamma(a) + mlog
        curv = np.where(interior, 1.0 / a, 0.0) - special.polygamma(1, a)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(curv < 0, -score / curv, 0.0)
        cand = a + step
        ok = (cand > lo_s) & (cand < hi_s) & np.isfinite(cand)
        cand = np.where(ok, cand, a)
        better = prof(cand) >= prof(a)
        a = np.where(better, cand, a)
    return a, region.rate_at(a, xbar)


def _suff_stats(data):
    x = np.asarray(data, dtype=float)
    if x.ndim != 1:
        raise ValueError("data must be one-dimensional")
    if x.size < 2:
        raise ValueError("the gamma MLE needs at least two observations")
    if np.any(~(x > 0)):
        raise ValueError("gamma data must be strictly positive")
    return x.mean(), np.log(x).mean(), x.size


def gamma_constrained_mle(data, region: GammaRegion):
    """Gamma MLE ``(shape, rate)`` over the closure of ``region``."""
    xbar, mlog, _ = _suff_stats(data)
    if math.log(xbar) - mlog <= 1e-14:
        warnings.warn("all observations are equal; the shape MLE sits on the search boundary",
                      DegenerateDataWarning, stacklevel=2)
    a, b = gamma_profile_mle(xbar, mlog, region)
    return float(a), float(b)


def gamma_log_lr(n, xbar, mlog, shape, rate, shape0, rate0):
    """Log of the likelihood ratio of Gamma(shape, rate) to the null,
    accumulated from sufficient statistics (safe for large ``n``)."""
    return n * (_gamma_mean_loglik(shape, rate, xbar, mlog) - _gamma_mean_loglik(shape0, rate0, xbar, mlog))


def gamma_lr_evalue(data, shape: float, rate: float, shape0: float = 1.0, rate0: float = 1.0) -> float:
    x = np.asarray(data, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("gamma data must be strictly positive")
    return float(np.exp(gamma_log_lr(x.size, x.mean(), np.log(x).mean(), shape, rate, shape0, rate0)))


def gamma_sup_stat(data, region: GammaRegion) -> float:
    """Likelihood ratio at the constrained MLE, i.e. the supremum of the
    likelihood-ratio e-values over the region."""
    xbar, mlog, n = _suff_stats(data)
    a, b = gamma_profile_mle(xbar, mlog, region)
    lr = gamma_log_lr(n, xbar, mlog, a, b, region.shape0, region.rate0)
    return float(np.exp(lr))


# --- Gaussian mixtures fitted by EM ------------------------------------------

MIXTURE_MODELS = ("two-means-unit-var", "symmetric-two-means", "full-five-param")

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass
class MixtureFit:
    """Two-component normal mixture ``w N(mu1, s1^2) + (1-w) N(mu2, s2^2)``."""

    weight: float
    mu1: float
    mu2: float
    sigma1: float = 1.0
    sigma2: float = 1.0
    loglik: list = field(default_factory=list)
    converged: bool = True
    flagged: bool = False

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return _mix_logpdf(x, self.weight, self.mu1, self.mu2, self.sigma1, self.sigma2)


def _norm_logpdf(x, mu, sigma):
    z = (x - mu) / sigma
    return -0.5 * z * z - np.log(sigma) - _LOG_SQRT_2PI


def _mix_logpdf(x, w, m1, m2, s1, s2):
    return np.logaddexp(np.log(w) + _norm_logpdf(x, m1, s1), np.log1p(-w) + _norm_logpdf(x, m2, s2))


def _median_split_init(x):
    """Half-means (and half-sds) of the sorted sample split at its median."""
    xs = np.sort(x, axis=1)
    h = xs.shape[1] // 2
    left, right = xs[:, :h], xs[:, h:]
    return left.mean(1), right.mean(1), left.std(1), right.std(1)


def _em_batch(x, model, init=None, max_iter=500, rtol=1e-8, min_sigma=1e-6):
    """EM on each row of ``x`` (shape R x n). Returns parameter arrays,
    the log-likelihood traces (R x iterations, NaN once a row stops), a
    convergence mask and a collapse mask. Stopped rows are dropped from
    the working set."""
    R, n = x.shape
    m1, m2, s1, s2 = _median_split_init(x) if init is None else init
    w = np.full(R, 0.5)
    if model == "symmetric-two-means":
        mu = 0.5 * (m2 - m1)
        m1, m2 = -mu, mu
    if model != "full-five-param":
        s1 = s2 = np.ones(R)
    else:
        s1 = np.maximum(s1, 10 * min_sigma)
        s2 = np.maximum(s2, 10 * min_sigma)
    params = [np.array(p, dtype=float, copy=True) for p in (w, m1, m2, s1, s2)]

    converged = np.zeros(R, dtype=bool)
    collapsed = np.zeros(R, dtype=bool)
    trace = np.full((R, max_iter), np.nan)
    idx = np.arange(R)
    xa = x
    cur = [p.copy() for p in params]
    prev = np.full(R, -np.inf)
    for it in range(max_iter):
        w, m1, m2, s1, s2 = (p[:, None] for p in cur)
        l1 = np.log(w) + _norm_logpdf(xa, m1, s1)
        l2 = np.log1p(-w) + _norm_logpdf(xa, m2, s2)
        ll_pt = np.logaddexp(l1, l2)
        ll = ll_pt.sum(1)
        trace[idx, it] = ll
        done = np.isfinite(prev) & (np.abs(ll - prev) <= rtol * np.abs(ll))
        converged[idx[done]] = True
        r1 = np.exp(l1 - ll_pt)
        r2 = 1.0 - r1
        n1 = np.maximum(r1.sum(1), 1e-300)
        n2 = np.maximum(r2.sum(1), 1e-300)
        w, m1, m2, s1, s2 = cur
        if model == "symmetric-two-means":
            mu = ((r2 - r1) * xa).mean(1)
            new = [w, -mu, mu, s1, s2]
        elif model == "two-means-unit-var":
            new = [w, (r1 * xa).sum(1) / n1, (r2 * xa).sum(1) / n2, s1, s2]
        else:
            nm1 = (r1 * xa).sum(1) / n1
            nm2 = (r2 * xa).sum(1) / n2
            ns1 = np.sqrt((r1 * (xa - nm1[:, None]) ** 2).sum(1) / n1)
            ns2 = np.sqrt((r2 * (xa - nm2[:, None]) ** 2).sum(1) / n2)
            nw = np.clip(n1 / n, 1e-12, 1 - 1e-12)
            bad = ~done & ~((ns1 >= min_sigma) & (ns2 >= min_sigma))
            collapsed[idx[bad]] = True
            done = done | bad
            new = [nw, nm1, nm2, ns1, ns2]
        # rows that stop keep the parameters that produced their last value
        for p, c in zip(params, cur):
            p[idx[done]] = c[done]
        keep = ~done
        if not keep.any():
            idx = idx[:0]
            break
        idx, xa, prev = idx[keep], xa[keep], ll[keep]
        cur = [v[keep] for v in new]
    for p, c in zip(params, cur):
        p[idx] = c
    return tuple(params), trace, converged, collapsed


def _em_with_restarts(x, model, max_restarts=5, seed=0):
    params, trace, converged, collapsed = _em_batch(x, model)
    params = [p.copy() for p in params]
    flagged = collapsed.copy()
    rng = np.random.default_rng(seed)
    for _ in range(max_restarts):
        idx = np.flatnonzero(flagged)
        if idx.size == 0:
            break
        sub = x[idx]
        m1, m2, s1, s2 = _median_split_init(sub)
        spread = sub.std(1) + 1.0
        jitter = (m1 + rng.normal(0, 0.5, idx.size) * spread, m2 + rng.normal(0, 0.5, idx.size) * spread,
                  np.maximum(s1, 0.1) * np.exp(rng.normal(0, 0.3, idx.size)),
                  np.maximum(s2, 0.1) * np.exp(rng.normal(0, 0.3, idx.size)))
        p2, tr2, conv2, coll2 = _em_batch(sub, model, init=jitter)
        ok = ~coll2
        for dst, src in zip(params, p2):
            dst[idx[ok]] = src[ok]
        trace[idx[ok]] = tr2[ok]
        converged[idx[ok]] = conv2[ok]
        flagged[idx[ok]] = False
    return params, trace, converged, flagged


def em_fit_gaussian_mixture(data, model: str = "full-five-param") -> MixtureFit:
    """Fit a two-component normal mixture by EM.

    Models: ``two-means-unit-var`` (equal weights, unit variances, free
    means), ``symmetric-two-means`` (``0.5 N(-mu,1) + 0.5 N(mu,1)``) and
    ``full-five-param`` (weight, means and scales free). Initialised from
    the two halves of the sorted sample; stops when the relative change in
    log-likelihood drops below 1e-8 or after 500 iterations. In the full
    model a component scale below 1e-6 triggers up to five jittered
    restarts, after which the fit is returned with ``flagged`` set.
    """
    if model not in MIXTURE_MODELS:
        raise ValueError(f"unknown mixture model {model!r}")
    x = np.asarray(data, dtype=float).reshape(1, -1)
    if x.shape[1] < 4:
        raise ValueError("EM needs at least four observations")
    (w, m1, m2, s1, s2), trace, converged, flagged = _em_with_restarts(x, model)
    ll = [float(v) for v in trace[0] if np.isfinite(v)]
    return MixtureFit(float(w[0]), float(m1[0]), float(m2[0]), float(s1[0]), float(s2[0]), ll,
                      bool(converged[0]), bool(flagged[0]))


def ui_split_lrt_batch(x, split: float = 0.5, model: str = "full-five-param"):
    """Split likelihood-ratio e-values for each row of ``x`` (R x n)."""
    if model not in MIXTURE_MODELS:
        raise ValueError(f"unknown mixture model {model!r}")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    k = int(round(split * x.shape[1]))
    if k < 4 or k >= x.shape[1]:
        raise ValueError("both halves of the split must be nonempty (and the fitting half >= 4)")
    fit_half, eval_half = x[:, :k], x[:, k:]
    (w, m1, m2, s1, s2), _, _, _ = _em_with_restarts(fit_half, model)
    log_alt = _mix_logpdf(eval_half, w[:, None], m1[:, None], m2[:, None], s1[:, None], s2[:, None])
    log_null = _norm_logpdf(eval_half, 0.0, 1.0)
    return np.exp((log_alt - log_null).sum(1))


def ui_split_lrt(data, split: float = 0.5, model: str = "full-five-param") -> float:
    """Universal-inference e-value: fit the mixture alternative on the
    first ``split`` fraction, evaluate its likelihood ratio against N(0,1)
    on the rest."""
    return float(ui_split_lrt_batch(np.asarray(data, dtype=float)[None, :], split, model)[0])
