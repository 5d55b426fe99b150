"""The e-BH procedure and boosting factors for its e-values."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, optimize

from .numerics import Bracket, find_root

B_MAX = 1e6
B_TOL = 1e-9


class BoostSaturationWarning(UserWarning):
    """The boosting criterion still holds at the search cap."""


@dataclass(frozen=True)
class BoostResult:
    lower: float
    upper: float
    regime: str  # "AD" | "PRDS"
    criterion: str  # "full-T" | "relaxed"
    saturated: bool = False

    def __post_init__(self):
        if self.regime not in ("AD", "PRDS"):
            raise ValueError(f"unknown dependence regime {self.regime!r}")
        if self.criterion not in ("full-T", "relaxed"):
            raise ValueError(f"unknown boosting criterion {self.criterion!r}")
        if not (1.0 <= self.lower <= self.upper):
            raise ValueError(f"boost bounds must satisfy 1 <= lower <= upper, got {self.lower}, {self.upper}")


@dataclass(frozen=True)
class DiscoverySet:
    rejected: np.ndarray  # indices into the input, sorted ascending
    k: int
    alpha: float
    K: int

    def __len__(self):
        return self.k


def t_transform(x, K: int):
    """``K / ceil(K/x)`` for ``x >= 1``, 0 below 1, ``K`` at infinity."""
    if K < 1:
        raise ValueError("K must be at least 1")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("t_transform needs nonnegative input")
    with np.errstate(divide="ignore"):
        out = np.where(arr >= 1.0, K / np.ceil(K / np.where(arr >= 1.0, arr, 1.0)), 0.0)
    out = np.where(np.isinf(arr), float(K), out)
    return float(out) if out.ndim == 0 else out


def ebh_reject(e, alpha: float) -> DiscoverySet:
    """Reject the ``k*`` largest e-values, ``k* = max{k : e_(k) >= K/(alpha k)}``."""
    e = np.asarray(e, dtype=float)
    if e.ndim != 1 or e.size == 0:
        raise ValueError("e-values must be a nonempty vector")
    if np.any(e < 0) or np.any(np.isnan(e)):
        raise ValueError("e-values must be nonnegative")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    K = e.size
    order = np.argsort(-e, kind="stable")
    ks = np.arange(1, K + 1)
    ok = e[order] * alpha * ks >= K
    k = int(ks[ok].max()) if ok.any() else 0
    if k == 0:
        return DiscoverySet(np.array([], dtype=int), 0, alpha, K)
    # everything tied with the k-th largest value is rejected too
    cut = e[order[k - 1]]
    rejected = np.flatnonzero(e >= cut)
    return DiscoverySet(rejected, int(rejected.size), alpha, K)


def ebh_batch_counts(e: np.ndarray, alpha: float, nulls: int | None = None):
    """Rejection counts (and false-rejection counts, if the first ``nulls``
    columns are the true nulls) for each row of ``e`` (R x K)."""
    e = np.atleast_2d(np.asarray(e, dtype=float))
    R, K = e.shape
    order = np.argsort(-e, axis=1, kind="stable")
    srt = np.take_along_axis(e, order, axis=1)
    ok = srt * alpha * np.arange(1, K + 1) >= K
    k = np.where(ok.any(1), K - np.argmax(ok[:, ::-1], axis=1), 0)
    cut = np.where(k > 0, srt[np.arange(R), np.maximum(k - 1, 0)], np.inf)
    rej = e >= cut[:, None]
    n_rej = rej.sum(1)
    n_false = rej[:, :nulls].sum(1) if nulls else np.zeros(R, dtype=int)
    return n_rej, n_false


def fdp(discoveries: DiscoverySet, nulls: Iterable[int]) -> float:
    rej = set(int(i) for i in discoveries.rejected)
    return len(rej & set(int(i) for i in nulls)) / max(1, len(rej))


# --- closed-form bounds for log-concave survival nulls ----------------------


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _lcs_ad_lhs(b, alpha):
    ab = alpha * b
    return math.exp(-1.0 / ab) * (1.0 + ab)


def boost_lcs_ad(alpha: float) -> BoostResult:
    """Bounds on the arbitrary-dependence boosting factor when the null
    e-variables have log-concave survival functions."""
    _check_alpha(alpha)

    def root(target):
        # the left side increases in b; no boost once it exceeds target at b = 1
        if _lcs_ad_lhs(1.0, alpha) >= target:
            return 1.0
        return find_root(lambda b: _lcs_ad_lhs(b, alpha) - target, Bracket(1.0, B_MAX))

    lo = root(alpha / math.e)
    hi = root(alpha)
    return BoostResult(lo, max(lo, hi), "AD", "relaxed")


def boost_lcs_pr(alpha: float) -> BoostResult:
    """Bounds on the PRDS boosting factor under log-concave survival nulls."""
    _check_alpha(alpha)
    la = math.log(alpha)
    lo = 1.0 / (alpha - alpha * la)
    hi = math.e if alpha >= math.exp(-1.0) else -1.0 / (alpha * la)
    return BoostResult(max(1.0, lo), max(1.0, lo, hi), "PRDS", "relaxed")


# --- boosting against a known null law ---------------------------------------


def _vectorized(S: Callable):
    def f(x):
        x = np.asarray(x, dtype=float)
        try:
            y = np.asarray(S(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda v: float(S(v)), otypes=[float])(x)
    return f


def _largest_feasible(crit: Callable[[float], float], alpha: float, cap: float = B_MAX, tol: float = B_TOL):
    """Largest ``c`` in ``[1, cap]`` with ``crit(c) <= alpha``, assuming
    ``crit`` is nondecreasing. Returns ``(c, saturated)``."""
    if crit(1.0) > alpha:
        return 1.0, False
    if crit(cap) <= alpha:
        warnings.warn(f"boosting criterion holds up to the cap b = {cap:g}", BoostSaturationWarning, stacklevel=3)
        return cap, True
    lo, hi = 1.0, cap
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if crit(mid) <= alpha:
            lo = mid
        else:
            hi = mid
    return lo, False


def full_t_expectation(S: Callable, c: float, alpha: float, K: int) -> float:
    """``E[T(alpha c E)]`` for a null with survival function ``S(x) = P(E >= x)``."""
    Sv = _vectorized(S)
    k = np.arange(1, K + 1, dtype=float)
    edges = K / (k * alpha * c)  # T(alpha c E) = K/k on [edges[k-1], edges[k-2])
    s = Sv(edges)
    upper = np.concatenate(([0.0], s[:-1]))
    return float(np.sum((K / k) * (s - upper)))


def relaxed_expectation(S: Callable, c: float, alpha: float) -> float:
    """``E[alpha c E 1{alpha c E >= 1}]`` by tail integration of ``S``."""
    a = 1.0 / (alpha * c)
    Sv = _vectorized(S)
    tail, _ = integrate.quad(lambda x: float(Sv(x)), a, np.inf, epsrel=1e-8, epsabs=0.0, limit=200)
    return alpha * c * (a * float(Sv(a)) + tail)


def boost_generic_ad(S: Callable, alpha: float, K: int = 1000, criterion: str = "full-T") -> float:
    """Largest boosting factor valid under arbitrary dependence for nulls
    with survival function ``S``."""
    _check_alpha(alpha)
    if criterion == "full-T":
        if K < 1:
            raise ValueError("K must be at least 1")
        crit = lambda c: full_t_expectation(S, c, alpha, K)  # noqa: E731
    elif criterion == "relaxed":
        crit = lambda c: relaxed_expectation(S, c, alpha)  # noqa: E731
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    return _largest_feasible(crit, alpha)[0]


def pr_grid_max(S: Callable, c: float, alpha: float, K: int) -> float:
    x = K / np.arange(1, K + 1, dtype=float)
    return float(np.max(x * _vectorized(S)(x / (alpha * c))))


def pr_continuous_max(S: Callable, c: float, alpha: float) -> float:
    """``sup_{x >= 1} x S(x / (alpha c))`` via a log grid and a local polish."""
    Sv = _vectorized(S)
    ac = alpha * c
    x = np.geomspace(1.0, max(1e6, 1e4 * ac), 4001)
    vals = x * Sv(x / ac)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, x.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda v: -v * float(Sv(v / ac)), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10 * hi})
        best = max(best, -float(res.fun))
    return best


def boost_generic_pr(S: Callable, alpha: float, K: int = 1000, criterion: str = "grid") -> float:
    """Largest boosting factor valid under PRDS for nulls with survival
    function ``S``; ``grid`` maximises over ``x in {K/k}``, ``relaxed``
    over all ``x >= 1``."""
    _check_alpha(alpha)
    if criterion == "grid":
        if K < 1:
            raise ValueError("K must be at least 1")
        crit = lambda c: pr_grid_max(S, c, alpha, K)  # noqa: E731
    elif criterion == "relaxed":
        crit = lambda c: pr_continuous_max(S, c, alpha)  # noqa: E731
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    return _largest_feasible(crit, alpha)[0]


def exp1_survival(x):
    """Survival function of the Exp(1) null."""
    x = np.asarray(x, dtype=float)
    return np.exp(-np.maximum(x, 0.0))
