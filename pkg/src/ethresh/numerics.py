"""Special functions, bracketed root solving and seeded random variates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

ROOT_TOL = 1e-12
ROOT_MAX_ITER = 200


class BracketError(ValueError):
    """The target function does not change sign on the bracket."""


class NumericError(ArithmeticError):
    """The target function returned a non-finite value."""


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    tol: float = ROOT_TOL

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not (self.tol > 0):
            raise ValueError(f"bracket tolerance must be positive, got {self.tol}")


def _checked(f: Callable[[float], float], x: float) -> float:
    y = float(f(x))
    if not math.isfinite(y):
        raise NumericError(f"non-finite function value {y!r} at x={x!r}")
    return y


def find_root(f: Callable[[float], float], bracket: Bracket, max_iter: int = ROOT_MAX_ITER) -> float:
    """Locate a sign change of ``f`` inside ``bracket``.

    Bisection safeguarded by secant (false-position) steps. A secant step is
    only kept when the previous step at least halved the bracket; otherwise
    the midpoint is used, so the bracket shrinks geometrically no matter how
    lopsided ``f`` is. Terminates once the width is below ``bracket.tol`` or
    cannot shrink further in floating point.

    Returns the bracket endpoint with the smaller residual.
    """
    lo, hi = bracket.lo, bracket.hi
    flo, fhi = _checked(f, lo), _checked(f, hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")

    prev_width = hi - lo
    for _ in range(max_iter):
        width = hi - lo
        if width <= bracket.tol:
            break
        mid = lo + 0.5 * width
        if not (lo < mid < hi):
            break
        x = mid
        if width <= 0.5 * prev_width:
            sec = lo - flo * width / (fhi - flo)
            if lo < sec < hi:
                x = sec
        prev_width = width
        fx = _checked(f, x)
        if fx == 0.0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
    return lo if abs(flo) <= abs(fhi) else hi


def normal_cdf(x):
    return special.ndtr(x)


def normal_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0) | (p_arr >= 1)) or np.any(np.isnan(p_arr)):
        raise ValueError("normal_quantile needs p in (0, 1)")
    return special.ndtri(p)


def digamma(x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0)):
        raise ValueError("digamma is only provided for x > 0")
    return special.digamma(x)


# --- random variates --------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Reproducible variate stream keyed by ``(seed, stream_id)``.

    Streams with distinct ids come from independent ``SeedSequence`` spawn
    keys, so per-replication streams can be handed to any worker.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


def sample(rng: RngStream | np.random.Generator, dist: str, size=None, **params):
    """Draw from ``uniform``, ``normal(mu, sigma)``, ``exponential(rate)``
    or ``gamma(shape, rate)``.

    ``rng`` may be an :class:`RngStream` (a fresh generator is derived, so
    repeated calls replay the same draws) or a live ``numpy`` generator.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if dist == "uniform":
        return gen.random(size)
    if dist == "normal":
        mu, sigma = params.get("mu", 0.0), params.get("sigma", 1.0)
        if not sigma > 0:
            raise ValueError("normal sigma must be positive")
        return gen.normal(mu, sigma, size)
    if dist == "exponential":
        rate = params.get("rate", 1.0)
        if not rate > 0:
            raise ValueError("exponential rate must be positive")
        return gen.exponential(1.0 / rate, size)
    if dist == "gamma":
        shape, rate = params.get("shape"), params.get("rate", 1.0)
        if shape is None or not shape > 0 or not rate > 0:
            raise ValueError("gamma needs shape > 0 and rate > 0")
        # numpy uses Marsaglia-Tsang squeeze rejection, boosted for shape < 1
        return gen.gamma(shape, 1.0 / rate, size)
    raise ValueError(f"unknown distribution {dist!r}")
