"""Behavioral probabilities ``p = f + q`` and the relations built on them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .attraction import AttractivenessRanking, attraction_from_ranking
from .utility import utility_factor

TOL = 1e-9
_EQ = 1e-12


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class DecisionProblem:
    labels: tuple[str, ...]
    f: NDArray[np.float64]
    q: NDArray[np.float64]
    p: NDArray[np.float64]
    clamp_flag: bool = False

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no alternative named {label!r}; have {self.labels}") from None

    def value(self, quantity: str, label: str) -> float:
        return float(getattr(self, quantity)[self.index(label)])


def assemble(
    f: Sequence[float],
    q: Sequence[float],
    labels: Sequence[str] | None = None,
    renormalize: bool = True,
) -> DecisionProblem:
    """Add utility and attraction factors, retracting to [0, 1].

    When the retraction fires ``clamp_flag`` is set and, by default, the result
    is renormalized.  With ``renormalize=False`` each entry is only retracted,
    so unclamped entries keep their exact ``f + q`` but ``p`` may not sum to 1.
    """
    fa = np.asarray(f, dtype=float)
    qa = np.asarray(q, dtype=float)
    if fa.shape != qa.shape or fa.ndim != 1:
        raise ProblemError(f"f and q differ in shape: {fa.shape} vs {qa.shape}")
    if abs(fa.sum() - 1.0) > TOL or np.any(fa < -TOL) or np.any(fa > 1 + TOL):
        raise ProblemError(f"utility factors are not a distribution: {fa}")
    if abs(qa.sum()) > TOL or np.any(np.abs(qa) > 1 + TOL):
        raise ProblemError(f"attraction factors break the alternation law: {qa}")
    if labels is None:
        labels = [f"A{i + 1}" for i in range(len(fa))]
    if len(labels) != len(fa):
        raise ProblemError("labels and factors differ in length")

    raw = fa + qa
    p = np.clip(raw, 0.0, 1.0)
    clamped = bool(np.any(p != raw))
    if clamped and renormalize:
        p = p / p.sum()
    return DecisionProblem(tuple(labels), fa, qa, p, clamped)


@dataclass(frozen=True)
class Optimum:
    index: int
    ties: tuple[int, ...] = field(default=())

    @property
    def tied(self) -> bool:
        return len(self.ties) > 1


def stochastic_optimum(problem: DecisionProblem) -> Optimum:
    """Alternative with the largest behavioral probability; ties go to the lowest index."""
    top = float(problem.p.max())
    ties = tuple(int(i) for i in np.flatnonzero(np.abs(problem.p - top) <= _EQ))
    return Optimum(ties[0], ties if len(ties) > 1 else ())


class Cmp(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _cmp(a: float, b: float) -> Cmp:
    if abs(a - b) <= _EQ:
        return Cmp.EQUAL
    return Cmp.GREATER if a > b else Cmp.LESS


@dataclass(frozen=True)
class Preference:
    """How alternative ``i`` compares with ``j`` on p, f and q separately."""

    by_p: Cmp
    by_f: Cmp
    by_q: Cmp

    @property
    def preferred(self) -> bool:
        return self.by_p is Cmp.GREATER

    @property
    def indifferent(self) -> bool:
        return self.by_p is Cmp.EQUAL

    @property
    def more_useful(self) -> bool:
        return self.by_f is Cmp.GREATER

    @property
    def equally_useful(self) -> bool:
        return self.by_f is Cmp.EQUAL

    @property
    def more_attractive(self) -> bool:
        return self.by_q is Cmp.GREATER

    @property
    def equally_attractive(self) -> bool:
        return self.by_q is Cmp.EQUAL


def preference_relation(problem: DecisionProblem, i: int, j: int) -> Preference:
    n = len(problem)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"indices ({i}, {j}) out of range for {n} alternatives")
    return Preference(
        _cmp(problem.p[i], problem.p[j]),
        _cmp(problem.f[i], problem.f[j]),
        _cmp(problem.q[i], problem.q[j]),
    )


@dataclass(frozen=True)
class Package:
    """One member of a bundle: alternatives with utilities and their own problem."""

    utilities: tuple[float, ...]
    problem: DecisionProblem
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.utilities) != len(self.problem):
            raise ProblemError("package utilities and inner problem differ in length")

    @property
    def utility(self) -> float:
        return float(np.dot(self.utilities, self.problem.p))


@dataclass(frozen=True)
class Bundle:
    packages: tuple[Package, ...]


def evaluate_bundle(
    bundle: Bundle,
    beta: float = 0.0,
    ranking: AttractivenessRanking | None = None,
) -> DecisionProblem:
    """Treat each package as a superlottery and decide among packages.

    Package utility is ``sum_n U(A_jn) p(A_jn)``.  Without a ranking the
    packages are taken as equally attractive.
    """
    if not bundle.packages:
        raise ProblemError("empty bundle")
    labels = [pk.label or f"P{j + 1}" for j, pk in enumerate(bundle.packages)]
    f = utility_factor([pk.utility for pk in bundle.packages], beta)
    if len(bundle.packages) == 1 or ranking is None:
        q = np.zeros(len(f))
    else:
        q = attraction_from_ranking(ranking)
    return assemble(f, q, labels)
