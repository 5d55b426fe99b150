"""Monte Carlo scenarios: Gaussian e-processes, universal inference,
gamma supremum tests and boosted e-BH."""

from __future__ import annotations

import math

import numpy as np
from scipy import special, stats

from ..ebh import boost_generic_ad, boost_lcs_ad, ebh_batch_counts, exp1_survival
from ..models import GammaRegion, gamma_log_lr, gamma_profile_mle, ui_split_lrt_batch
from ..thresholds import threshold
from .config import ScenarioConfig
from .runner import ScenarioRow, mean_row, proportion_row, run_chunked, stream_rows

KEY_COLUMNS = {
    "gaussian": ("data_mu", "test", "threshold", "alpha", "n", "beta"),
    "universal-inference": ("signal", "threshold", "alpha", "model", "n_fit", "n_eval"),
    "gamma": ("test", "region", "alpha", "n"),
    "ebh": ("procedure", "alpha", "signal_b", "boost"),
}


def _sum_dicts(parts):
    out = {}
    for part in parts:
        for k, v in part.items():
            out[k] = out[k] + v if k in out else v
    return out


# --- Gaussian ---------------------------------------------------------------


def _gaussian_tests(mus):
    """(name, log e-statistic of (S, n), is an e-process)."""
    tests = [(f"lr_mu={m:g}", (lambda S, n, m=m: m * S - n * m * m / 2.0), True) for m in mus]
    tests.append(("supremum", lambda S, n: np.maximum(S, 0.0) ** 2 / (2.0 * n), False))
    tests.append(("mixture", lambda S, n: S * S / (2.0 * n + 2.0) - 0.5 * np.log1p(n), True))
    return tests


def run_gaussian(cfg: ScenarioConfig) -> list[ScenarioRow]:
    """Rejection rates of Gaussian e-statistics with improved thresholds,
    optional stopping (running maximum against ``1/alpha``), and the first
    sample size at which each test reaches power ``beta``."""
    n_max, mu, R = cfg["n_max"], cfg["data_mu"], cfg.replications
    tests = _gaussian_tests(cfg["test_mus"])
    log_t = {(a, c): math.log(threshold(c, a).value) for a in cfg.alpha for c in cfg["thresholds"]}
    n = np.arange(1, n_max + 1, dtype=float)

    def work(start, stop):
        x = stream_rows(cfg.seed, start, stop, lambda g: g.normal(mu, 1.0, n_max))
        S = np.cumsum(x, axis=1)
        counts = {}
        for name, log_e, is_process in tests:
            L = log_e(S, n)
            for (a, c), lt in log_t.items():
                counts[(name, c, a)] = (L >= lt).sum(0)
            if is_process:
                run_max = np.maximum.accumulate(L, axis=1)
                for a in cfg.alpha:
                    counts[(name, "OS+E0", a)] = (run_max >= -math.log(a)).sum(0)
        return counts

    counts = _sum_dicts(run_chunked(work, R, cfg.threads))
    rows = []
    for (name, c, a), hits in counts.items():
        base = {"data_mu": mu, "test": name, "threshold": c, "alpha": a}
        for k in cfg["n_grid"]:
            rows.append(proportion_row({**base, "n": k}, "rejection_rate", int(hits[k - 1]), R))
        power = hits / R
        for beta in cfg["betas"]:
            reached = np.flatnonzero(power >= beta)
            first = float(reached[0] + 1) if reached.size else math.nan
            rows.append(ScenarioRow({**base, "beta": beta}, "first_n_to_power", first, None))
    return rows


# --- universal inference ----------------------------------------------------


def run_ui(cfg: ScenarioConfig) -> list[ScenarioRow]:
    """Power of split likelihood-ratio e-tests against a symmetric two-mean
    mixture ``0.5 N(-mu, 1) + 0.5 N(mu, 1)``, per signal and threshold.
    All signals reuse the same underlying draws."""
    n_fit, n_eval, R = cfg["n_fit"], cfg["n_eval"], cfg.replications
    n_tot = n_fit + n_eval
    split = n_fit / n_tot
    ts = {(a, c): threshold(c, a).value for a in cfg.alpha for c in cfg["thresholds"]}

    def draw(g):
        return np.concatenate([np.where(g.random(n_tot) < 0.5, -1.0, 1.0), g.normal(0.0, 1.0, n_tot)])

    def work(start, stop):
        raw = stream_rows(cfg.seed, start, stop, draw)
        signs, z = raw[:, :n_tot], raw[:, n_tot:]
        out = {}
        for mu in cfg["signals"]:
            e = ui_split_lrt_batch(mu * signs + z, split, cfg["model"])
            for (a, c), t in ts.items():
                out[(mu, c, a)] = int(np.sum(e >= t))
        return out

    counts = _sum_dicts(run_chunked(work, R, cfg.threads))
    return [proportion_row({"signal": mu, "threshold": c, "alpha": a, "model": cfg["model"],
                            "n_fit": n_fit, "n_eval": n_eval}, "rejection_rate", hits, R)
            for (mu, c, a), hits in counts.items()]


# --- gamma ------------------------------------------------------------------


def _prefix_stats(x, ns):
    idx = np.asarray(ns) - 1
    xbar = np.cumsum(x, axis=1)[:, idx] / np.asarray(ns)
    mlog = np.cumsum(np.log(x), axis=1)[:, idx] / np.asarray(ns)
    return xbar, mlog


def gamma_sup_log_stats(x, ns, region: GammaRegion):
    """Log supremum statistic of each row of ``x`` at each prefix length."""
    xbar, mlog = _prefix_stats(x, ns)
    a, b = gamma_profile_mle(xbar, mlog, region)
    return gamma_log_lr(np.asarray(ns, dtype=float), xbar, mlog, a, b, region.shape0, region.rate0)


def run_gamma(cfg: ScenarioConfig) -> list[ScenarioRow]:
    """Null type-I errors of the gamma supremum test per region, and power
    of the supremum test against the fixed-alternative likelihood ratio."""
    a0, b0, R = cfg["shape0"], cfg["rate0"], cfg.replications
    regions = [GammaRegion(r, a0, b0) for r in cfg["regions"]]
    ns = cfg["n_grid"]
    pns = cfg["power_n_grid"]
    a1, b1 = cfg["alt_shape"], cfg["alt_rate"]
    p_region = GammaRegion(cfg["power_region"], a0, b0)
    levels = {a: -math.log(a) for a in cfg.alpha}

    def work(start, stop):
        out = {}
        x = stream_rows(cfg.seed, start, stop, lambda g: g.gamma(a0, 1.0 / b0, max(ns)))
        for reg in regions:
            ly = gamma_sup_log_stats(x, ns, reg)
            for a, lv in levels.items():
                out[("supremum", reg.region, a, "type1")] = (ly >= lv).sum(0)
        if pns:
            y = stream_rows(cfg.seed, start, stop, lambda g: g.gamma(a1, 1.0 / b1, max(pns)), offset=R)
            ly = gamma_sup_log_stats(y, pns, p_region)
            xbar, mlog = _prefix_stats(y, pns)
            lr = gamma_log_lr(np.asarray(pns, dtype=float), xbar, mlog, a1, b1, a0, b0)
            for a, lv in levels.items():
                out[("supremum", p_region.region, a, "power")] = (ly >= lv).sum(0)
                out[("likelihood_ratio", "fixed", a, "power")] = (lr >= lv).sum(0)
        return out

    counts = _sum_dicts(run_chunked(work, R, cfg.threads))
    rows = []
    for (test, reg, a, metric), hits in counts.items():
        grid = ns if metric == "type1" else pns
        for k, h in zip(grid, hits):
            rows.append(proportion_row({"test": test, "region": reg, "alpha": a, "n": k}, metric, int(h), R))
    return rows


# --- e-BH -------------------------------------------------------------------


def equicorrelated_normals(g: np.random.Generator, K: int, rho: float) -> np.ndarray:
    """``K`` standard normals with common pairwise correlation ``rho``.

    ``X = a G + b mean(G)`` with ``a = sqrt(1 - rho)`` and ``b`` solving
    ``(2ab + b^2)/K = rho``; at ``rho = -1/(K-1)`` this is the centred
    sample rescaled by ``1/sqrt(1 - 1/K)``.
    """
    if not (-1.0 / (K - 1) - 1e-15 <= rho < 1.0):
        raise ValueError("correlation must lie in [-1/(K-1), 1)")
    G = g.normal(size=K)
    a = math.sqrt(1.0 - rho)
    b = -a + math.sqrt(max(a * a + K * rho, 0.0))
    return a * G + b * G.mean()


def bh_batch_counts(p: np.ndarray, alpha: float, nulls: int):
    """Benjamini-Hochberg step-up on each row of ``p``."""
    R, K = p.shape
    srt = np.sort(p, axis=1)
    ok = srt <= alpha * np.arange(1, K + 1) / K
    k = np.where(ok.any(1), K - np.argmax(ok[:, ::-1], axis=1), 0)
    cut = np.where(k > 0, srt[np.arange(R), np.maximum(k - 1, 0)], -np.inf)
    rej = p <= cut[:, None]
    return rej.sum(1), rej[:, :nulls].sum(1)


def run_ebh(cfg: ScenarioConfig) -> list[ScenarioRow]:
    """Discoveries and FDP of base, LCS-boosted, exact-null-boosted e-BH
    and of BH on ``p = exp(-e)``, under an equicorrelated Gaussian copula.
    The first ``K0`` hypotheses are null (Exp(1)); the rest are
    Gamma(1 + theta, rate 1/(1 + theta)) with theta ~ Exp(mean b)."""
    K, K0, rho, R = cfg["K"], cfg["K0"], cfg["correlation"], cfg.replications
    boosts = {}
    for a in cfg.alpha:
        boosts[("base", a)] = 1.0
        boosts[("lcs_boosted", a)] = boost_lcs_ad(a).lower
        boosts[("exact_boosted", a)] = boost_generic_ad(exp1_survival, a, K, "full-T")
        boosts[("p_bh", a)] = 1.0

    def draw(g):
        return np.concatenate([equicorrelated_normals(g, K, rho), g.exponential(1.0, K - K0)])

    def work(start, stop):
        raw = stream_rows(cfg.seed, start, stop, draw)
        X, w = raw[:, :K], raw[:, K:]
        tail = special.ndtr(-X)  # P(Z >= X), kept small for precision in the upper tail
        out = {}
        for bsig in cfg["signal_b"]:
            theta = bsig * w
            e = np.empty_like(X)
            e[:, :K0] = -np.log(tail[:, :K0])
            e[:, K0:] = stats.gamma.isf(tail[:, K0:], a=1.0 + theta, scale=1.0 + theta)
            for (proc, a), c in boosts.items():
                if proc == "p_bh":
                    n_rej, n_false = bh_batch_counts(np.exp(-e), a, K0)
                else:
                    n_rej, n_false = ebh_batch_counts(c * e, a, K0)
                f = n_false / np.maximum(n_rej, 1)
                n_rej = n_rej.astype(float)
                out[(proc, a, bsig)] = np.array([n_rej.sum(), (n_rej**2).sum(), f.sum(), (f**2).sum()])
        return out

    sums = _sum_dicts(run_chunked(work, R, cfg.threads))
    rows = []
    for (proc, a, bsig), (s1, s2, f1, f2) in sums.items():
        keys = {"procedure": proc, "alpha": a, "signal_b": bsig, "boost": boosts[(proc, a)]}
        rows.append(mean_row(keys, "discoveries", s1, s2, R))
        rows.append(mean_row(keys, "fdp", f1, f2, R))
    return rows


RUNNERS = {
    "gaussian": run_gaussian,
    "universal-inference": run_ui,
    "gamma": run_gamma,
    "ebh": run_ebh,
}


def run_scenario(cfg: ScenarioConfig) -> list[ScenarioRow]:
    return RUNNERS[cfg.scenario](cfg)
