"""Worst-case type-I errors, improved rejection thresholds and calibrators.

For a class of e-variables ``C`` and ``gamma`` in (0, 1] the worst-case
error is ``R(C, gamma) = sup_{E in C} P(E >= 1/gamma)``; the improved
threshold at level ``alpha`` is the smallest ``t >= 1`` with
``R(C, 1/t) <= alpha``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .numerics import Bracket, find_root, normal_cdf, normal_quantile


class EClass(str, enum.Enum):
    E0 = "E0"  # every e-variable
    D = "D"  # decreasing density on the support
    DGT1 = "DGT1"  # decreasing density on [1, inf)
    U = "U"  # unimodal density on [0, inf)
    LS = "LS"  # log E symmetric
    LU = "LU"  # log E unimodal
    LDGT0 = "LDGT0"  # log E decreasing density on [0, inf)
    LD = "LD"  # log E decreasing density
    LUS = "LUS"  # log E unimodal and symmetric
    LN = "LN"  # log-normal
    LCD = "LCD"  # log-concave density
    LCS = "LCS"  # log-concave survival function
    LCF = "LCF"  # log-concave distribution function

    @classmethod
    def parse(cls, name: str) -> "EClass":
        key = name.strip().upper().replace(">", "GT").replace("_", "").replace("-", "")
        aliases = {"E": "E0", "0": "E0"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown e-variable class {name!r}; expected one of "
                             f"{', '.join(c.value for c in cls)}") from None


# direct inclusions (subclass, superclass); every class is also inside E0
_INCLUSIONS = (
    (EClass.D, EClass.DGT1),
    (EClass.D, EClass.U),
    (EClass.LN, EClass.LUS),
    (EClass.LUS, EClass.LS),
    (EClass.LUS, EClass.LU),
    (EClass.LD, EClass.LDGT0),
    (EClass.LD, EClass.LU),
    (EClass.LCD, EClass.LCS),
    (EClass.LCD, EClass.LCF),
    (EClass.LCD, EClass.U),
    (EClass.D, EClass.LCF),
    (EClass.LDGT0, EClass.DGT1),
)

CONSERVATIVE = frozenset({EClass.LUS, EClass.LD, EClass.LCD})


@lru_cache(maxsize=None)
def superclasses(c: EClass) -> frozenset:
    """All classes containing ``c`` (reflexive, transitive)."""
    out = {c, EClass.E0}
    frontier = [c]
    while frontier:
        cur = frontier.pop()
        for sub, sup in _INCLUSIONS:
            if sub is cur and sup not in out:
                out.add(sup)
                frontier.append(sup)
    return frozenset(out)


def is_subclass(a: EClass, b: EClass) -> bool:
    return b in superclasses(a)


@dataclass(frozen=True)
class BoundedValue:
    """A worst-case probability or threshold, flagged exact or conservative."""

    value: float
    kind: str  # "exact" | "conservative"
    eclass: EClass
    arg: float

    @property
    def exact(self) -> bool:
        return self.kind == "exact"

    def __float__(self):
        return self.value


# --- root equations ---------------------------------------------------------


def ld0_root(gamma: float) -> float:
    """Solution ``t`` in (1, e) of ``t (1 - log t) = gamma``."""
    if gamma >= 1.0:
        return 1.0
    return find_root(lambda t: t * (1.0 - math.log(t)) - gamma, Bracket(1.0, math.e))


def lcs_log_root(gamma: float) -> float:
    """Log of the worst-case LCS exceedance probability.

    The worst case is ``exp(s/gamma)`` where ``s`` in (-1, 0) solves
    ``exp(s/gamma) = s + 1``. Writing ``u = s/gamma`` gives the equation
    ``u = expm1(u)/gamma`` whose nontrivial root lies in
    ``[-1/gamma - 1, log(gamma)]``; this stays well conditioned for small
    gamma where ``s`` is within rounding of -1.
    """
    if gamma >= 1.0:
        return 0.0

    def g(u):
        return u - math.expm1(u) / gamma

    return find_root(g, Bracket(-1.0 / gamma - 1.0, math.log(gamma)))


def lcs_root(gamma: float) -> float:
    """``s_gamma``: the root in (-1, 0) of ``exp(s/gamma) = s + 1``."""
    return math.expm1(lcs_log_root(gamma))


# --- worst-case errors ------------------------------------------------------


def _r_markov(g):
    return g


def _r_d(g):
    return 1.0 if g == 1.0 else g / 2.0


def _r_dgt1(g):
    return g / (1.0 + math.sqrt(1.0 - g * g))


def _r_u(g):
    return max(g / 2.0, 2.0 * g - 1.0)


def _r_ls(g):
    return 1.0 if g == 1.0 else min(g, 0.5)


def _r_ldgt0(g):
    return g / ld0_root(g)


def _r_ln(g):
    if g == 1.0:
        return 1.0
    return float(normal_cdf(-math.sqrt(-2.0 * math.log(g))))


def _r_lcs(g):
    return math.exp(lcs_log_root(g))


def _r_lus_bound(g):
    # log-uniform bound, the D>1 bound and the LD>0 value all apply since
    # LD and LUS share their worst case and LD sits inside LD>0 and D>1;
    # LUS sits inside LS, so the LS value applies as well
    first = math.inf if g == 1.0 else g / (math.e * (1.0 - g * g))
    return min(first, _r_dgt1(g), _r_ldgt0(g), _r_ls(g))


def _r_lcd_bound(g):
    return min(_r_u(g), _r_lcs(g))


_WORST_CASE: dict[EClass, Callable[[float], float]] = {
    EClass.E0: _r_markov,
    EClass.LU: _r_markov,
    EClass.LCF: _r_markov,
    EClass.D: _r_d,
    EClass.DGT1: _r_dgt1,
    EClass.U: _r_u,
    EClass.LS: _r_ls,
    EClass.LDGT0: _r_ldgt0,
    EClass.LN: _r_ln,
    EClass.LCS: _r_lcs,
    EClass.LUS: _r_lus_bound,
    EClass.LD: _r_lus_bound,
    EClass.LCD: _r_lcd_bound,
}


def _kind(c: EClass) -> str:
    return "conservative" if c in CONSERVATIVE else "exact"


def worst_case_error(eclass: EClass | str, gamma: float) -> BoundedValue:
    """Largest ``P(E >= 1/gamma)`` over the class (an upper bound for
    LUS, LD and LCD)."""
    c = EClass.parse(eclass) if isinstance(eclass, str) else eclass
    gamma = float(gamma)
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    value = min(_WORST_CASE[c](gamma), gamma)
    return BoundedValue(value, _kind(c), c, gamma)


# --- thresholds -------------------------------------------------------------


def _t_lus_first(a):
    # positive root of a*e*g^2 + g - a*e = 0, rationalized against cancellation
    ae = a * math.e
    return (1.0 + math.sqrt(1.0 + 4.0 * ae * ae)) / (2.0 * ae)


def _t_markov(a):
    return 1.0 / a


def _t_d(a):
    return 1.0 / (2.0 * a)


def _t_dgt1(a):
    return 1.0 / (2.0 * a) + a / 2.0


def _t_u(a):
    return 1.0 / (2.0 * a) if a <= 1.0 / 3.0 else 2.0 / (1.0 + a)


def _t_ls(a):
    return 1.0 / a if a < 0.5 else 1.0


def _t_lcs(a):
    return -math.log(a) / (1.0 - a)


def _t_ldgt0(a):
    return math.exp(a - 1.0) / a


def _t_ln(a):
    # R(LN, gamma) never exceeds 1/2 below gamma = 1
    if a >= 0.5:
        return 1.0
    q = float(normal_quantile(a))
    return math.exp(q * q / 2.0)


def _t_lus(a):
    return min(_t_lus_first(a), _t_dgt1(a), _t_ldgt0(a), _t_ls(a))


def _t_lcd(a):
    return min(_t_u(a), _t_lcs(a))


_THRESHOLD: dict[EClass, Callable[[float], float]] = {
    EClass.E0: _t_markov,
    EClass.LU: _t_markov,
    EClass.LCF: _t_markov,
    EClass.D: _t_d,
    EClass.DGT1: _t_dgt1,
    EClass.U: _t_u,
    EClass.LS: _t_ls,
    EClass.LCS: _t_lcs,
    EClass.LDGT0: _t_ldgt0,
    EClass.LN: _t_ln,
    EClass.LUS: _t_lus,
    EClass.LD: _t_lus,
    EClass.LCD: _t_lcd,
}


def threshold(eclass: EClass | str, alpha: float) -> BoundedValue:
    """Smallest ``t >= 1`` whose worst-case exceedance is at most ``alpha``.

    >>> threshold("D", 0.05).value
    10.0
    """
    c = EClass.parse(eclass) if isinstance(eclass, str) else eclass
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return BoundedValue(max(1.0, _THRESHOLD[c](alpha)), _kind(c), c, alpha)


def threshold_by_inversion(eclass: EClass | str, alpha: float, t_max: float = 1e9) -> float:
    """Threshold obtained by root-solving ``R(C, 1/t) = alpha`` directly.

    Independent of the closed forms in :func:`threshold`; used to
    cross-check them. Only meaningful where the answer exceeds 1.
    """
    c = EClass.parse(eclass) if isinstance(eclass, str) else eclass
    f = _WORST_CASE[c]
    return find_root(lambda t: f(1.0 / t) - alpha, Bracket(1.0, t_max))


# --- calibrators ------------------------------------------------------------


def calibrate(eclass: EClass | str, e: float) -> float:
    """Smallest e-to-p calibrator on the class, ``x -> R(C, 1/x)``."""
    e = float(e)
    if e < 0 or math.isnan(e):
        raise ValueError("e-values are nonnegative")
    if e <= 1.0:
        return 1.0
    if math.isinf(e):
        return 0.0
    return min(1.0, worst_case_error(eclass, 1.0 / e).value)


def precise_p(cdf: Callable[[float], float], x: float) -> float:
    """p-value ``F(x)`` from the statistic's own cdf.

    Equals the reciprocal of the largest e-value among all e-variables that
    are decreasing functions of the statistic.
    """
    return float(cdf(x))
