"""Attraction factors: priors, lottery quality, ranking and the tanh model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import LINEAR, Lottery, UtilityFunction, gain_loss_number

QUALITY_BASE = 30.0
QUARTER = 0.25
_Q_TIE = 1e-12


class RankingError(ValueError):
    pass


@dataclass(frozen=True)
class AttractivenessRanking:
    """Alternatives grouped from most to least attractive.

    ``groups[0]`` holds the most attractive indices.  A single group covering
    every alternative is the neutral class.
    """

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        flat = [i for g in self.groups for i in g]
        if sorted(flat) != list(range(len(flat))) or any(len(g) == 0 for g in self.groups):
            raise RankingError(f"not a valid ranking of 0..{len(flat) - 1}: {self.groups}")

    @classmethod
    def strict(cls, order: Sequence[int]) -> "AttractivenessRanking":
        return cls(tuple((int(i),) for i in order))

    @classmethod
    def neutral(cls, n: int) -> "AttractivenessRanking":
        return cls((tuple(range(n)),))

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(i for g in self.groups for i in g)

    @property
    def is_neutral(self) -> bool:
        return len(self.groups) == 1 and self.n > 1

    @property
    def is_strict(self) -> bool:
        return all(len(g) == 1 for g in self.groups)


def ladder_value(n_alternatives: int, rank: int) -> Fraction:
    """Prior for the ``rank``-th most attractive of ``N`` alternatives (rank from 1)."""
    n = n_alternatives
    if n % 2 == 0:
        return Fraction(n - 2 * rank + 1, 2 * n)
    return Fraction(n * (n - 2 * rank + 1), 2 * (n * n - 1))


def ladder_gap(n_alternatives: int) -> Fraction:
    n = n_alternatives
    return Fraction(1, n) if n % 2 == 0 else Fraction(n, n * n - 1)


def ladder_priors(n_alternatives: int, ranking: AttractivenessRanking | None = None) -> tuple[Fraction, ...]:
    """Non-informative attraction priors, exact, indexed by alternative.

    Without a ranking the alternatives are taken in index order.  Tied groups
    share the mean of the ladder rungs they occupy, so the alternation law
    survives ties.
    """
    n = n_alternatives
    if n < 2:
        raise RankingError("need at least two alternatives")
    if ranking is None:
        ranking = AttractivenessRanking.strict(range(n))
    if ranking.n != n:
        raise RankingError(f"ranking covers {ranking.n} alternatives, expected {n}")
    out: list[Fraction] = [Fraction(0)] * n
    rank = 1
    for group in ranking.groups:
        rungs = [ladder_value(n, r) for r in range(rank, rank + len(group))]
        share = sum(rungs, Fraction(0)) / len(group)
        for i in group:
            out[i] = share
        rank += len(group)
    return tuple(out)


def base_from_scaling(lam: float, p: float) -> float:
    """Quality base at which ``{u, p}`` and ``{lam*u, p/lam}`` are equally attractive.

    Solves ``u b**p = lam u b**(p/lam)``, i.e. ``b = lam**(lam / ((lam - 1) p))``.
    """
    if not lam > 1.0:
        raise ValueError(f"scaling lambda must exceed 1, got {lam}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"probability must lie in (0, 1], got {p}")
    return lam ** (lam / ((lam - 1.0) * p))


def lottery_quality(lottery: Lottery, u: UtilityFunction = LINEAR, base: float = QUALITY_BASE) -> float:
    """``Q = sum_i u(x_i) * base**p_i``.

    Zero-probability entries contribute ``u(x)`` (``base**0``), as the formula
    is written; this only matters when such an entry has ``u(x) != 0``.
    """
    if not base > 1.0:
        raise ValueError(f"quality base must exceed 1, got {base}")
    return math.fsum(u(x) * base**p for x, p in lottery.pairs())


def _group_by_keys(keys: list[tuple[float, int]]) -> AttractivenessRanking:
    order = sorted(range(len(keys)), key=lambda i: (-keys[i][0], -keys[i][1], i))
    groups: list[list[int]] = []
    for i in order:
        if groups:
            j = groups[-1][0]
            same_q = math.isclose(keys[i][0], keys[j][0], rel_tol=_Q_TIE, abs_tol=_Q_TIE)
            if same_q and keys[i][1] == keys[j][1]:
                groups[-1].append(i)
                continue
        groups.append([i])
    return AttractivenessRanking(tuple(tuple(sorted(g)) for g in groups))


def rank_lotteries(
    lotteries: Sequence[Lottery], u: UtilityFunction = LINEAR, base: float = QUALITY_BASE
) -> AttractivenessRanking:
    """Order by quality, then by gain-loss number; full ties form one group."""
    if len(lotteries) < 2:
        raise RankingError("need at least two lotteries to rank")
    keys = [(lottery_quality(l, u, base), gain_loss_number(l)) for l in lotteries]
    return _group_by_keys(keys)


def attraction_from_ranking(ranking: AttractivenessRanking) -> np.ndarray:
    return np.array([float(q) for q in ladder_priors(ranking.n, ranking)])


def tanh_attraction(u_a: float, u_b: float, a: float, beta: float) -> tuple[float, float]:
    """Two-alternative model ``q_A = min(phi_A, phi_B) * tanh(a (U_A - U_B))``.

    ``phi`` is the two-point softmax of the utilities at belief ``beta``.
    """
    if a < 0:
        raise ValueError("steepness a must be nonnegative")
    z = beta * (u_a - u_b)
    phi_a = 0.5 * (1.0 + math.tanh(z / 2.0))
    q_a = min(phi_a, 1.0 - phi_a) * math.tanh(a * (u_a - u_b))
    return q_a, -q_a


@dataclass(frozen=True)
class QuarterLawReport:
    per_record_q: tuple[float, ...]
    mean_abs_q: float

    @property
    def deviation(self) -> float:
        return self.mean_abs_q - QUARTER


def quarter_law_check(records: Sequence[tuple[float, float]]) -> QuarterLawReport:
    """Empirical attraction ``q = p - f`` per record and the mean ``|q|``."""
    if not records:
        raise ValueError("no records")
    qs = []
    for p, f in records:
        if not (0.0 <= p <= 1.0 and 0.0 <= f <= 1.0):
            raise ValueError(f"record ({p}, {f}) outside [0, 1]")
        qs.append(p - f)
    return QuarterLawReport(tuple(qs), math.fsum(abs(q) for q in qs) / len(qs))
