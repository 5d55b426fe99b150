"""Classes of products and affine shrinkages of e-variables, and tail
bounds for weighted averages of independent log-concave e-variables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .numerics import Bracket, find_root
from .thresholds import EClass, threshold, worst_case_error


@dataclass(frozen=True)
class FactorSpec:
    """What is known about one factor of a product of e-variables.

    ``msu``: multiplicatively strongly unimodal on [0, inf).
    ``decreasing_at_zero``: decreasing density with mode at zero (implies
    ``msu``; also implied by ``eclass == D``).
    ``independent``: independent of the product of all other factors.
    ``sequential``: a sequential e-value given the earlier factors.
    """

    eclass: EClass = EClass.E0
    msu: bool = False
    decreasing_at_zero: bool = False
    independent: bool = False
    sequential: bool = False

    def __post_init__(self):
        if isinstance(self.eclass, str) and not isinstance(self.eclass, EClass):
            object.__setattr__(self, "eclass", EClass.parse(self.eclass))
        if self.eclass is EClass.D:
            object.__setattr__(self, "decreasing_at_zero", True)
        if self.decreasing_at_zero:
            object.__setattr__(self, "msu", True)
        # an independent e-value is in particular sequential
        if self.independent:
            object.__setattr__(self, "sequential", True)

    def downgraded(self) -> "FactorSpec":
        """Same dependence flags, no distributional information."""
        return FactorSpec(EClass.E0, independent=self.independent, sequential=self.sequential)


def product_class(factors: Sequence[FactorSpec]) -> EClass:
    """Class guaranteed for the product of the given e-variables."""
    factors = list(factors)
    if not factors:
        raise ValueError("product_class needs at least one factor")
    *head, last = factors
    if last.independent and last.decreasing_at_zero and all(f.sequential for f in head):
        return EClass.D
    if all(f.independent and f.msu for f in factors):
        return EClass.U
    return EClass.E0


_SHRINK_STABLE = frozenset({EClass.D, EClass.U, EClass.LCD, EClass.LCF})


def lambda_transform_class(eclass: EClass | str, lam: float) -> EClass:
    """Class of ``1 - lam + lam * E`` for ``E`` in ``eclass``."""
    c = EClass.parse(eclass) if isinstance(eclass, str) else eclass
    lam = float(lam)
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if lam == 0.0:
        return EClass.LCF  # the constant 1
    if lam == 1.0:
        return c
    return c if c in _SHRINK_STABLE else EClass.E0


@dataclass(frozen=True)
class WeightVector:
    weights: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w:
            raise ValueError("weights must be nonempty")
        if any(not (x >= 0) for x in w):
            raise ValueError("weights must be nonnegative")
        if abs(math.fsum(w) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {math.fsum(w)}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def equal(cls, T: int) -> "WeightVector":
        if T < 1:
            raise ValueError("need at least one weight")
        return cls((1.0 / T,) * T)

    @property
    def w_min(self) -> float:
        return min(self.weights)

    def __len__(self):
        return len(self.weights)


def _exp_tail(w: float, gamma: float) -> float:
    # gamma^{-w} exp(-w (1/gamma - 1)), in log space
    t = 1.0 / gamma
    return math.exp(-w * (t - 1.0 - math.log(t)))


def avg_tail_bound(T: int, weights: WeightVector, gamma: float) -> float:
    """Upper bound on ``P(sum_t w_t E_t >= 1/gamma)`` for independent
    e-variables with log-concave densities."""
    if not isinstance(weights, WeightVector):
        weights = WeightVector(tuple(weights))
    if len(weights) != T:
        raise ValueError(f"{len(weights)} weights given for {T} e-variables")
    gamma = float(gamma)
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    return min(_exp_tail(weights.w_min, gamma), worst_case_error(EClass.U, gamma).value)


def exp_branch_threshold(w_min: float, alpha: float) -> float:
    """Smallest ``t >= 1`` with ``exp(-w (t - 1 - log t)) <= alpha``."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not w_min > 0:
        return math.inf
    target = -math.log(alpha) / w_min
    # log t <= t/2, so t - 1 - log t >= target once t >= 2 (target + 1)
    hi = 2.0 * (target + 2.0)
    return find_root(lambda t: t - 1.0 - math.log(t) - target, Bracket(1.0, hi))


def avg_threshold(T: int, alpha: float, weights: WeightVector | None = None) -> float:
    """Rejection threshold for the average of ``T`` independent
    log-concave e-variables (equal weights unless given)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    w = WeightVector.equal(T) if weights is None else weights
    if len(w) != T:
        raise ValueError(f"{len(w)} weights given for {T} e-variables")
    t_u = threshold(EClass.U, alpha).value
    return max(1.0, min(exp_branch_threshold(w.w_min, alpha), t_u))
