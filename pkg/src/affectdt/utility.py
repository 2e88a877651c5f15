"""Utility factors: the rational part of a behavioral probability.

``f_n`` is the minimizer of an information functional with a Luce-rule prior,
which gives ``f_n ∝ prior_n * exp(beta * U_n)``.  The belief parameter ``beta``
may be ``math.inf`` or ``-math.inf`` to request the deterministic limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import bisect

from .core import LINEAR, UtilityFunction

SUM_TOL = 1e-9

PLUS_INFINITY = math.inf
MINUS_INFINITY = -math.inf


class DegeneratePriorError(ValueError):
    pass


def _check_factor(f: NDArray[np.float64]) -> NDArray[np.float64]:
    assert abs(f.sum() - 1.0) <= SUM_TOL, f"utility factors sum to {f.sum()}"
    assert np.all(f >= 0.0) and np.all(f <= 1.0 + SUM_TOL)
    return f


def luce_attributes(utilities: Sequence[float]) -> NDArray[np.float64]:
    """``a = U`` for ``U >= 0`` and ``a = 1/|U|`` for ``U < 0``."""
    u = np.asarray(utilities, dtype=float)
    if u.size == 0:
        raise ValueError("need at least one utility")
    neg = u < 0
    out = u.copy()
    out[neg] = 1.0 / np.abs(u[neg])
    return out


def luce_prior(utilities: Sequence[float]) -> NDArray[np.float64]:
    a = luce_attributes(utilities)
    total = a.sum()
    if total <= 0.0:
        raise DegeneratePriorError("all Luce attributes are zero")
    return _check_factor(a / total)


def _limit_indicator(u: NDArray[np.float64], sign: float) -> NDArray[np.float64]:
    target = u.max() if sign > 0 else u.min()
    hit = (u == target).astype(float)
    return hit / hit.sum()


def utility_factor(
    utilities: Sequence[float],
    beta: float = 0.0,
    prior: Sequence[float] | None = None,
) -> NDArray[np.float64]:
    """Posterior utility factors ``f ∝ prior * exp(beta*U)``.

    ``prior`` defaults to :func:`luce_prior`.  Infinite ``beta`` returns the
    indicator of the best (``+inf``) or worst (``-inf``) alternative, ties
    split evenly.
    """
    u = np.asarray(utilities, dtype=float)
    if math.isnan(beta):
        raise ValueError("beta is NaN")
    if math.isinf(beta):
        return _check_factor(_limit_indicator(u, beta))
    w0 = luce_prior(u) if prior is None else np.asarray(prior, dtype=float)
    if w0.shape != u.shape:
        raise ValueError("prior and utilities differ in length")
    if np.any(w0 < 0) or w0.sum() <= 0:
        raise DegeneratePriorError("prior must be nonnegative with positive mass")
    with np.errstate(divide="ignore"):
        logw = np.where(w0 > 0, np.log(np.where(w0 > 0, w0, 1.0)) + beta * u, -np.inf)
    logw -= logw.max()
    w = np.exp(logw)
    return _check_factor(w / w.sum())


def global_mean_utility(f: Sequence[float], utilities: Sequence[float]) -> float:
    """The constraint value ``sum_n f_n U_n`` of the information functional."""
    return float(np.dot(np.asarray(f, dtype=float), np.asarray(utilities, dtype=float)))


def exponential_discount(rate: float) -> Callable[[float], float]:
    """``D(t) = (1 + r)**(-t)``; ``D(0) = 1`` and ``D`` decays to zero."""
    if rate < 0:
        raise ValueError(f"discount rate must be nonnegative, got {rate}")

    def d(t: float) -> float:
        if math.isinf(t):
            return 0.0 if rate > 0 else 1.0
        return (1.0 + rate) ** (-t)

    return d


def discounted_utility_factor(
    utilities: Sequence[float],
    beta: float,
    discount: Callable[[float], float] | float,
    t: float,
    prior: Sequence[float] | None = None,
) -> NDArray[np.float64]:
    """Utility factor at the discounted belief ``beta * D(t)``.

    ``discount`` is either a callable ``D`` or a rate ``r`` for the built-in
    exponential discount.
    """
    d = exponential_discount(discount) if not callable(discount) else discount
    return utility_factor(utilities, beta * d(t), prior)


@dataclass(frozen=True)
class StPetersburgReport:
    divergent: bool
    ratio_onset: int | None
    utilities: tuple[float, ...]
    n_opt: float | None
    beta_estimate: float | None

    @property
    def optimal_utility(self) -> float | None:
        # U(L_opt) = 1/|beta|
        return None if self.beta_estimate is None else 1.0 / abs(self.beta_estimate)


def _self_consistent_tosses() -> float:
    return bisect(lambda n: n - math.sqrt(2.0) * math.sinh(1.0 / (2.0 * n)), 0.05, 20.0, xtol=1e-14)


def stpetersburg_analysis(
    max_n: int,
    u: UtilityFunction = LINEAR,
    payoff: Callable[[int], float] | None = None,
    prob: Callable[[int], float] | None = None,
) -> StPetersburgReport:
    """Divergence test and belief estimate for a Bernoulli-type game.

    Terms ``u(x_m) p_m`` are examined for ``m = 1..max_n``.  The game is
    flagged divergent when the ratio ``a_{m+1}/a_m`` stays at or above one from
    some onset ``m*`` in the first half of the window onward.  For a divergent
    game the belief parameter must be negative; its magnitude is estimated as
    ``1/n_opt`` with ``n_opt`` solving ``n = sqrt(2) sinh(1/(2n))``.
    """
    if max_n < 4:
        raise ValueError("max_n must be at least 4")
    payoff = payoff or (lambda m: 2.0**m)
    prob = prob or (lambda m: 2.0**-m)
    terms = [u(payoff(m)) * prob(m) for m in range(1, max_n + 1)]
    partial = list(np.cumsum(terms))

    onset = None
    for start in range(len(terms) - 1):
        if all(terms[k] > 0 and terms[k + 1] / terms[k] >= 1.0 for k in range(start, len(terms) - 1)):
            onset = start + 1
            break
    divergent = onset is not None and onset <= max_n // 2

    if not divergent:
        return StPetersburgReport(False, onset, tuple(float(x) for x in partial), None, None)
    n_opt = _self_consistent_tosses()
    return StPetersburgReport(True, onset, tuple(float(x) for x in partial), n_opt, -1.0 / n_opt)
