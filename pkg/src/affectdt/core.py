"""Lotteries, utility functions and expected utility.

A lottery is a finite list of (payoff, probability) pairs.  Everything else in
the package consumes lotteries through :func:`expected_utility` and
:func:`gain_loss_number`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

PROB_TOL = 1e-9


class LotteryError(ValueError):
    """Raised when a lottery violates its invariants."""


@dataclass(frozen=True)
class LotteryDiagnostics:
    ok: bool
    messages: tuple[str, ...] = ()
    prob_sum: float | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_lottery(payoffs: Sequence[float], probs: Sequence[float]) -> LotteryDiagnostics:
    """Check lottery invariants without raising.

    Reports length mismatch, empty payoff list, probabilities outside [0, 1]
    and a probability sum that misses 1 by more than ``PROB_TOL``.
    """
    msgs: list[str] = []
    if len(payoffs) == 0:
        msgs.append("payoffs list is empty")
    if len(payoffs) != len(probs):
        msgs.append(f"length mismatch: {len(payoffs)} payoffs vs {len(probs)} probs")
    for i, p in enumerate(probs):
        if not math.isfinite(p) or p < 0.0 or p > 1.0:
            msgs.append(f"probability {i} = {p!r} outside [0, 1]")
    for i, x in enumerate(payoffs):
        if not math.isfinite(x):
            msgs.append(f"payoff {i} = {x!r} is not finite")
    total = math.fsum(probs) if len(probs) else 0.0
    if abs(total - 1.0) > PROB_TOL:
        msgs.append(f"probability sum violation: {total:.12g}")
    return LotteryDiagnostics(ok=not msgs, messages=tuple(msgs), prob_sum=total)


@dataclass(frozen=True)
class Lottery:
    """Finite lottery ``{x_1, p_1 | x_2, p_2 | ...}``.

    Inputs are validated on construction and never renormalized.
    """

    payoffs: tuple[float, ...]
    probs: tuple[float, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        payoffs = tuple(float(x) for x in self.payoffs)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "payoffs", payoffs)
        object.__setattr__(self, "probs", probs)
        diag = validate_lottery(payoffs, probs)
        if not diag.ok:
            name = f"lottery {self.label!r}: " if self.label else ""
            raise LotteryError(name + "; ".join(diag.messages))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]], label: str = "") -> "Lottery":
        pairs = list(pairs)
        return cls(tuple(x for x, _ in pairs), tuple(p for _, p in pairs), label)

    @classmethod
    def certain(cls, payoff: float, label: str = "") -> "Lottery":
        return cls((payoff,), (1.0,), label)

    def __len__(self) -> int:
        return len(self.payoffs)

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.payoffs, self.probs))

    def negated(self) -> "Lottery":
        """Turn gains into losses (x -> -x) keeping probabilities."""
        return Lottery(tuple(-x for x in self.payoffs), self.probs, self.label)


def mix(a: Lottery, b: Lottery, alpha: float, label: str = "") -> Lottery:
    """Compound lottery ``alpha*a + (1-alpha)*b`` with equal payoffs merged.

    Payoffs keep the order of first appearance (``a`` first, then ``b``).
    """
    if not 0.0 <= alpha <= 1.0:
        raise LotteryError(f"mixing weight {alpha} outside [0, 1]")
    acc: dict[float, float] = {}
    for x, p in a.pairs():
        acc[x] = acc.get(x, 0.0) + alpha * p
    for x, p in b.pairs():
        acc[x] = acc.get(x, 0.0) + (1.0 - alpha) * p
    return Lottery(tuple(acc), tuple(acc.values()), label)


@dataclass(frozen=True)
class UtilityFunction:
    """Map from payoff to utiles.

    Use the module-level constructors (:func:`linear`, :func:`logarithmic`,
    :func:`square_root`, :func:`tabulated`) rather than building one directly.
    """

    kind: str
    fn: Callable[[float], float] = field(compare=False)
    scale: float = 1.0

    def __call__(self, x: float) -> float:
        return self.scale * self.fn(x)

    def scaled(self, a: float) -> "UtilityFunction":
        return UtilityFunction(self.kind, self.fn, self.scale * a)


def linear() -> UtilityFunction:
    return UtilityFunction("linear", lambda x: x)


def logarithmic(shift: float = 1.0) -> UtilityFunction:
    """``u(x) = ln(x + shift)``; defined for ``x > -shift``."""

    def _log(x: float) -> float:
        if x + shift <= 0:
            raise ValueError(f"logarithmic utility undefined at x={x}")
        return math.log(x + shift)

    return UtilityFunction("logarithmic", _log)


def square_root() -> UtilityFunction:
    """Odd-symmetric square root, ``sign(x) * sqrt(|x|)``."""
    return UtilityFunction("square_root", lambda x: math.copysign(math.sqrt(abs(x)), x))


def tabulated(table: dict[float, float]) -> UtilityFunction:
    """User-supplied lookup table; must be nondecreasing in the payoff."""
    keys = sorted(table)
    vals = [table[k] for k in keys]
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise ValueError("tabulated utility must be nondecreasing")
    frozen = dict(table)

    def _lookup(x: float) -> float:
        try:
            return frozen[x]
        except KeyError:
            raise ValueError(f"payoff {x} missing from utility table") from None

    return UtilityFunction("table", _lookup)


LINEAR = linear()


def expected_utility(lottery: Lottery, u: UtilityFunction = LINEAR) -> float:
    return math.fsum(u(x) * p for x, p in lottery.pairs())


def gain_loss_number(lottery: Lottery) -> int:
    """Possible gains minus possible losses; zero-probability entries are ignored."""
    gains = sum(1 for x, p in lottery.pairs() if p > 0 and x > 0)
    losses = sum(1 for x, p in lottery.pairs() if p > 0 and x < 0)
    return gains - losses


def st_petersburg_lottery(n: int) -> Lottery:
    """Bernoulli game with ``n`` tosses: payoffs ``2**m`` with probability ``2**-m``.

    The residual mass ``2**-n`` pays nothing so that probabilities sum to one.
    """
    if n < 1:
        raise LotteryError("need at least one toss")
    payoffs = [2.0**m for m in range(1, n + 1)] + [0.0]
    probs = [2.0**-m for m in range(1, n + 1)] + [2.0**-n]
    return Lottery(tuple(payoffs), tuple(probs), f"L{n}")
