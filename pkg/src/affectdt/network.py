"""Interacting agent groups with herding and information memory.

Each group ``j`` holds a utility factor ``f_j`` and a bare attraction factor
``q0_j`` for the first of two alternatives.  Exchanged information erodes the
attraction as ``q_j(t) = q0_j exp(-M_j(t))``, where ``M_j`` is built from the
Kullback-Leibler gain against the other group, either summed over the whole
history (long-term memory) or taken at the current step only (short-term).
Herding pulls each group toward the other's evaluation with strength
``epsilon_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

KL_CLAMP = 1e-12
LONG_TERM = "long_term"
SHORT_TERM = "short_term"
MEMORY_KINDS = (LONG_TERM, SHORT_TERM)

FIXED_POINT = "fixed_point"
PERIODIC = "periodic"
CHAOTIC = "chaotic"
_COMPLEXITY = {FIXED_POINT: 0, PERIODIC: 1, CHAOTIC: 2}


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class AgentGroup:
    f: float
    q0: float
    epsilon: float = 0.0
    memory: str = LONG_TERM
    fraction: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.f <= 1.0:
            raise NetworkError(f"utility factor {self.f} outside [0, 1]")
        if not -1.0 <= self.q0 <= 1.0:
            raise NetworkError(f"attraction factor {self.q0} outside [-1, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise NetworkError(f"herding strength {self.epsilon} outside [0, 1]")
        if self.memory not in MEMORY_KINDS:
            raise NetworkError(f"memory must be one of {MEMORY_KINDS}, got {self.memory!r}")
        if not 0.0 <= self.fraction <= 1.0:
            raise NetworkError(f"fraction {self.fraction} outside [0, 1]")


@dataclass(frozen=True)
class RegimeThresholds:
    """Regime detection knobs; the burn-in is the first half of the run."""

    amplitude: float = 1e-6
    period_tol: float = 1e-6
    max_period: int = 50
    perturbation: float = 1e-9
    divergence: float = 0.1
    min_length: int = 200


def kl_gain(p_i: float, p_j: float) -> float:
    """Binary Kullback-Leibler gain of ``p_i`` relative to ``p_j``."""
    a = min(max(p_i, KL_CLAMP), 1.0 - KL_CLAMP)
    b = min(max(p_j, KL_CLAMP), 1.0 - KL_CLAMP)
    return a * math.log(a / b) + (1.0 - a) * math.log((1.0 - a) / (1.0 - b))


def _pair(groups: Sequence[AgentGroup]) -> tuple[AgentGroup, AgentGroup]:
    if len(groups) != 2:
        raise NetworkError(f"the two-group model needs exactly two groups, got {len(groups)}")
    return groups[0], groups[1]


def _mix(g1: AgentGroup, g2: AgentGroup, a1: float, a2: float) -> tuple[float, float]:
    """``(1-eps_j)(f_j + q_j) + eps_j (f_i + q_i)`` for both groups."""
    v1, v2 = g1.f + a1, g2.f + a2
    return (1.0 - g1.epsilon) * v1 + g1.epsilon * v2, (1.0 - g2.epsilon) * v2 + g2.epsilon * v1


def initial_probabilities(groups: Sequence[AgentGroup]) -> tuple[float, float]:
    g1, g2 = _pair(groups)
    return _mix(g1, g2, g1.q0, g2.q0)


@dataclass(frozen=True)
class NetworkState:
    """``p`` at step ``t`` together with the memory accumulated before ``t``."""

    t: int
    p: tuple[float, float]
    history: tuple[float, float] = (0.0, 0.0)
    clamped: bool = False


@dataclass(frozen=True)
class StepFactors:
    mu: tuple[float, float]
    memory: tuple[float, float]
    q: tuple[float, float]
    h: tuple[float, float]
    history: tuple[float, float]


def _factors(p: tuple[float, float], history: tuple[float, float], g1: AgentGroup, g2: AgentGroup, J: float) -> StepFactors:
    mu = (J * kl_gain(p[0], p[1]), J * kl_gain(p[1], p[0]))
    hist = (history[0] + mu[0], history[1] + mu[1])
    mem = tuple(hist[k] if g.memory == LONG_TERM else mu[k] for k, g in enumerate((g1, g2)))
    q = (g1.q0 * math.exp(-mem[0]), g2.q0 * math.exp(-mem[1]))
    h = (
        g1.epsilon * (g2.f + q[1] - g1.f - q[0]),
        g2.epsilon * (g1.f + q[0] - g2.f - q[1]),
    )
    return StepFactors(mu, mem, q, h, hist)


def _retract(x: float) -> tuple[float, bool]:
    if x < 0.0:
        return 0.0, True
    if x > 1.0:
        return 1.0, True
    return x, False


def step_discrete(state: NetworkState, groups: Sequence[AgentGroup], J: float = 1.0) -> NetworkState:
    """Advance one decision round: ``p_j(t+1) = f_j + q_j(t) + h_j(t)``."""
    g1, g2 = _pair(groups)
    fac = _factors(state.p, state.history, g1, g2, J)
    a, ca = _retract(g1.f + fac.q[0] + fac.h[0])
    b, cb = _retract(g2.f + fac.q[1] + fac.h[1])
    return NetworkState(state.t + 1, (a, b), fac.history, ca or cb)


@dataclass(frozen=True)
class Trajectory:
    """Per-step records; row ``t`` of ``q``, ``M``, ``h`` is evaluated at ``p[t]``."""

    t: NDArray[np.float64]
    p: NDArray[np.float64]
    q: NDArray[np.float64]
    M: NDArray[np.float64]
    h: NDArray[np.float64]
    groups: tuple[AgentGroup, ...]
    model: str = "discrete"
    J: float = 1.0
    step: float = 1.0
    clamp_count: int = 0

    def __len__(self) -> int:
        return len(self.t)

    @property
    def final(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.p[-1])


def simulate_discrete(groups: Sequence[AgentGroup], T: int, J: float = 1.0) -> Trajectory:
    if T < 1:
        raise NetworkError("T must be at least 1")
    g1, g2 = _pair(groups)
    p = initial_probabilities(groups)
    hist = (0.0, 0.0)
    rows_p, rows_q, rows_m, rows_h = [], [], [], []
    clamps = 0
    for _ in range(T + 1):
        fac = _factors(p, hist, g1, g2, J)
        rows_p.append(p)
        rows_q.append(fac.q)
        rows_m.append(fac.memory)
        rows_h.append(fac.h)
        a, ca = _retract(g1.f + fac.q[0] + fac.h[0])
        b, cb = _retract(g2.f + fac.q[1] + fac.h[1])
        clamps += ca + cb
        p, hist = (a, b), fac.history
    return Trajectory(
        np.arange(T + 1, dtype=float),
        np.array(rows_p),
        np.array(rows_q),
        np.array(rows_m),
        np.array(rows_h),
        (g1, g2),
        "discrete",
        J,
        1.0,
        clamps,
    )


def simulate_continuous(
    groups: Sequence[AgentGroup],
    T: float,
    h: float = 0.01,
    J: float = 1.0,
    sample_every: float = 1.0,
) -> Trajectory:
    """Fourth-order Runge-Kutta integration of ``dp_j/dt = f_j + q_j + h_j - p_j``.

    The state carries ``I_j = int_0^t mu_j``.  Long-term memory is the
    trapezoid-corrected ``I_j + (mu_j(0) + mu_j(t))/2``, so ``M_j(0) = mu_j(0)``;
    short-term memory is ``mu_j(t)``.  Output is sampled every ``sample_every``.
    """
    if not h > 0:
        raise NetworkError(f"step h must be positive, got {h}")
    if T <= 0:
        raise NetworkError("T must be positive")
    g1, g2 = _pair(groups)
    long1, long2 = g1.memory == LONG_TERM, g2.memory == LONG_TERM
    p1, p2 = initial_probabilities(groups)
    mu0 = (J * kl_gain(p1, p2), J * kl_gain(p2, p1))

    def factors(p1: float, p2: float, i1: float, i2: float):
        m12, m21 = J * kl_gain(p1, p2), J * kl_gain(p2, p1)
        M1 = i1 + 0.5 * (mu0[0] + m12) if long1 else m12
        M2 = i2 + 0.5 * (mu0[1] + m21) if long2 else m21
        a1, a2 = g1.q0 * math.exp(-M1), g2.q0 * math.exp(-M2)
        h1 = g1.epsilon * (g2.f + a2 - g1.f - a1)
        h2 = g2.epsilon * (g1.f + a1 - g2.f - a2)
        return m12, m21, M1, M2, a1, a2, h1, h2

    def rhs(p1: float, p2: float, i1: float, i2: float):
        m12, m21, _, _, a1, a2, h1, h2 = factors(p1, p2, i1, i2)
        return g1.f + a1 + h1 - p1, g2.f + a2 + h2 - p2, m12, m21

    n = int(round(T / h))
    every = max(1, int(round(sample_every / h)))
    y = (p1, p2, 0.0, 0.0)
    ts, rp, rq, rm, rh = [], [], [], [], []
    for k in range(n + 1):
        if k % every == 0:
            _, _, M1, M2, a1, a2, h1, h2 = factors(*y)
            ts.append(k * h)
            rp.append(y[:2])
            rq.append((a1, a2))
            rm.append((M1, M2))
            rh.append((h1, h2))
        if k == n:
            break
        k1 = rhs(*y)
        k2 = rhs(*(y[i] + 0.5 * h * k1[i] for i in range(4)))
        k3 = rhs(*(y[i] + 0.5 * h * k2[i] for i in range(4)))
        k4 = rhs(*(y[i] + h * k3[i] for i in range(4)))
        y = tuple(y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in range(4))
    return Trajectory(
        np.array(ts), np.array(rp), np.array(rq), np.array(rm), np.array(rh), (g1, g2), "continuous", J, h
    )


# --- regimes -----------------------------------------------------------------


@dataclass(frozen=True)
class RegimeReport:
    groups: tuple[str, ...]
    periods: tuple[int | None, ...]
    divergence: tuple[float | None, ...]

    @property
    def overall(self) -> str:
        return max(self.groups, key=_COMPLEXITY.__getitem__)

    @property
    def mixed(self) -> bool:
        return len(set(self.groups)) > 1


def _period(x: NDArray[np.float64], tol: float, kmax: int) -> int | None:
    for k in range(1, min(kmax, len(x) - 1) + 1):
        if np.max(np.abs(x[k:] - x[:-k])) < tol:
            return k
    return None


def _rerun(tr: Trajectory, eps: float) -> Trajectory:
    g = list(tr.groups)
    last = g[-1]
    g[-1] = replace(last, q0=last.q0 + eps if last.q0 + eps <= 1.0 else last.q0 - eps)
    T = len(tr) - 1
    if tr.model == "discrete":
        return simulate_discrete(g, T, tr.J)
    return simulate_continuous(g, tr.t[-1], tr.step, tr.J, tr.t[1] - tr.t[0])


def classify_regime(tr: Trajectory, th: RegimeThresholds = RegimeThresholds()) -> RegimeReport:
    """Label each group's tail as fixed point, periodic, or chaotic.

    On the second half of the run a group is a fixed point when its range is
    below ``amplitude`` or it repeats with period one; periodic when some
    period up to ``max_period`` repeats within ``period_tol``; chaotic when a
    rerun with the last group's ``q0`` nudged by ``perturbation`` separates by
    more than ``divergence``.  Anything left is a fixed point if its range is
    still shrinking (slow approach) and periodic otherwise.
    """
    if len(tr) < th.min_length:
        raise NetworkError(f"trajectory has {len(tr)} steps, need at least {th.min_length}")
    half = len(tr) // 2
    labels: list[str] = []
    periods: list[int | None] = []
    divs: list[float | None] = []
    shadow: Trajectory | None = None
    for j in range(tr.p.shape[1]):
        x = tr.p[half:, j]
        div = None
        k = None
        if np.ptp(x) < th.amplitude:
            label = FIXED_POINT
        else:
            k = _period(x, th.period_tol, th.max_period)
            if k == 1:
                label = FIXED_POINT
            elif k is not None:
                label = PERIODIC
            else:
                if shadow is None:
                    shadow = _rerun(tr, th.perturbation)
                div = float(np.max(np.abs(shadow.p[half:, j] - x)))
                if div > th.divergence:
                    label = CHAOTIC
                else:
                    quarter = len(x) // 4
                    shrinking = np.ptp(x[-quarter:]) < np.ptp(x[-2 * quarter : -quarter])
                    label = FIXED_POINT if shrinking else PERIODIC
        labels.append(label)
        periods.append(k if label == PERIODIC else None)
        divs.append(div)
    return RegimeReport(tuple(labels), tuple(periods), tuple(divs))


# --- fixed points --------------------------------------------------------------


@dataclass(frozen=True)
class FixedPoint:
    converged: bool
    p: tuple[float, float]
    q: tuple[float, float]
    residual: float
    iterations: int
    branch: str
    reason: str = ""


def fixed_point_solve(
    groups: Sequence[AgentGroup],
    branch: str = "divergent",
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    J: float = 1.0,
) -> FixedPoint:
    """Stationary ``(p*, q*)`` of the two-group dynamics.

    ``branch="divergent"`` assumes long-term memory grows without bound, so
    ``q* = 0`` for long-term groups, while short-term groups keep
    ``q* = q0 exp(-mu(p*))``; the system is solved by damped iteration.

    ``branch="consensus"`` looks for ``p1* = p2*``: short-term groups then keep
    their bare ``q0`` and a long-term group's limit is solved from the equality.
    It is feasible only when that limit has the sign of ``q0`` and is no larger.
    """
    g1, g2 = _pair(groups)
    if branch == "consensus":
        return _consensus(g1, g2)
    if branch != "divergent":
        raise NetworkError(f"unknown branch {branch!r}")

    def q_star(p: tuple[float, float]) -> tuple[float, float]:
        out = []
        for k, g in enumerate((g1, g2)):
            if g.memory == LONG_TERM:
                out.append(0.0)
            else:
                out.append(g.q0 * math.exp(-J * kl_gain(p[k], p[1 - k])))
        return out[0], out[1]

    p = initial_probabilities(groups)
    res = math.inf
    for it in range(1, max_iter + 1):
        q = q_star(p)
        target = _mix(g1, g2, *q)
        res = max(abs(target[0] - p[0]), abs(target[1] - p[1]))
        if res < tol:
            return FixedPoint(True, p, q, res, it, branch)
        p = ((1 - damping) * p[0] + damping * target[0], (1 - damping) * p[1] + damping * target[1])
    q = q_star(p)
    return FixedPoint(False, p, q, res, max_iter, branch, "no convergence; the regime may be oscillatory")


def _consensus(g1: AgentGroup, g2: AgentGroup) -> FixedPoint:
    kinds = (g1.memory, g2.memory)
    if kinds == (LONG_TERM, LONG_TERM):
        return FixedPoint(False, (math.nan,) * 2, (math.nan,) * 2, math.inf, 0, "consensus",
                          "both limits free; consensus is underdetermined")
    gap = 1.0 - g1.epsilon - g2.epsilon
    if kinds == (SHORT_TERM, SHORT_TERM):
        p = _mix(g1, g2, g1.q0, g2.q0)
        res = abs(p[0] - p[1])
        ok = res < 1e-12
        return FixedPoint(ok, p, (g1.q0, g2.q0), res, 0, "consensus", "" if ok else "bare factors do not agree")
    if abs(gap) < 1e-15:
        return FixedPoint(False, (math.nan,) * 2, (math.nan,) * 2, math.inf, 0, "consensus",
                          "herding strengths sum to one; consensus is underdetermined")
    # f_l + q_l = f_s + q0_s for the long-term group l and short-term group s
    if g1.memory == LONG_TERM:
        q = (g2.f + g2.q0 - g1.f, g2.q0)
        bare = g1.q0
        free = q[0]
    else:
        q = (g1.q0, g1.f + g1.q0 - g2.f)
        bare = g2.q0
        free = q[1]
    p = _mix(g1, g2, *q)
    ratio = free / bare if bare != 0 else math.nan
    ok = 0.0 < ratio <= 1.0 and all(0.0 <= x <= 1.0 for x in p)
    return FixedPoint(ok, p, q, abs(p[0] - p[1]), 0, "consensus",
                      "" if ok else f"infeasible limit q*/q0 = {ratio:.6g}")


# --- aggregates and the general model ------------------------------------------


def collective_probability(fractions: Sequence[float], p: NDArray[np.float64] | Trajectory) -> NDArray[np.float64]:
    """``p(t) = sum_j c_j p_j(t)`` for group fractions ``c``."""
    c = np.asarray(fractions, dtype=float)
    if np.any(c < 0) or abs(c.sum() - 1.0) > 1e-9:
        raise NetworkError(f"fractions must be nonnegative and sum to 1, got {c}")
    arr = p.p if isinstance(p, Trajectory) else np.asarray(p, dtype=float)
    if arr.shape[1] != len(c):
        raise NetworkError(f"{len(c)} fractions for {arr.shape[1]} groups")
    return arr @ c if arr.ndim == 2 else np.einsum("j,tj...->t...", c, arr)


@dataclass(frozen=True)
class GeneralGroup:
    """A group over ``N_A`` alternatives; ``q0`` must sum to zero."""

    f: tuple[float, ...]
    q0: tuple[float, ...]
    epsilon: float = 0.0
    memory: str = LONG_TERM
    fraction: float = 0.0

    def __post_init__(self) -> None:
        f = np.asarray(self.f, dtype=float)
        q = np.asarray(self.q0, dtype=float)
        if f.shape != q.shape or f.ndim != 1 or len(f) < 2:
            raise NetworkError("f and q0 need the same length of at least two")
        if np.any(f < 0) or abs(f.sum() - 1.0) > 1e-9:
            raise NetworkError(f"utility factors are not normalized: {f}")
        if abs(q.sum()) > 1e-9 or np.any(np.abs(q) > 1):
            raise NetworkError(f"attraction factors break the alternation law: {q}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise NetworkError("herding strength outside [0, 1]")
        if self.memory not in MEMORY_KINDS:
            raise NetworkError(f"unknown memory kind {self.memory!r}")


@dataclass(frozen=True)
class GeneralTrajectory:
    """Arrays shaped ``(T+1, N, N_A)``; ``M`` is ``(T+1, N)``."""

    p: NDArray[np.float64]
    q: NDArray[np.float64]
    M: NDArray[np.float64]
    h: NDArray[np.float64]
    clamp_count: int = 0


def _kl_matrix(p: NDArray[np.float64]) -> NDArray[np.float64]:
    c = np.clip(p, KL_CLAMP, 1.0 - KL_CLAMP)
    logs = np.log(c)
    # mu[j, i] = sum_n p_j ln(p_j / p_i)
    return np.einsum("jn,jn->j", c, logs)[:, None] - c @ logs.T


def simulate_general(groups: Sequence[GeneralGroup], T: int, J: float = 1.0) -> GeneralTrajectory:
    """Mean-field dynamics of ``N`` groups over ``N_A`` alternatives.

    ``M_j = J/(N-1) sum_{i != j} mu_ji`` (summed over past steps for long-term
    memory) and ``h_j = eps_j [mean_{i != j}(f_i + q_i) - (f_j + q_j)]``.
    """
    if T < 1:
        raise NetworkError("T must be at least 1")
    N = len(groups)
    if N < 2:
        raise NetworkError("need at least two groups")
    f = np.array([g.f for g in groups], dtype=float)
    q0 = np.array([g.q0 for g in groups], dtype=float)
    if f.ndim != 2:
        raise NetworkError("all groups need the same number of alternatives")
    eps = np.array([g.epsilon for g in groups])[:, None]
    long = np.array([g.memory == LONG_TERM for g in groups])
    off = 1.0 - np.eye(N)

    def herd(q: NDArray[np.float64]) -> NDArray[np.float64]:
        v = f + q
        others = (off @ v) / (N - 1)
        return eps * (others - v)

    def retract(x: NDArray[np.float64]) -> tuple[NDArray[np.float64], int]:
        y = np.clip(x, 0.0, 1.0)
        n = int(np.count_nonzero(y != x))
        if n and y.shape[1] > 2:
            y = y / y.sum(axis=1, keepdims=True)
        return y, n

    p, clamps = retract(f + q0 + herd(q0))
    hist = np.zeros(N)
    P, Q, MM, H = [], [], [], []
    for _ in range(T + 1):
        mu = J * (_kl_matrix(p) * off).sum(axis=1) / (N - 1)
        hist = hist + mu
        M = np.where(long, hist, mu)
        q = q0 * np.exp(-M)[:, None]
        h = herd(q)
        P.append(p)
        Q.append(q)
        MM.append(M)
        H.append(h)
        p, n = retract(f + q + h)
        clamps += n
    return GeneralTrajectory(np.array(P), np.array(Q), np.array(MM), np.array(H), clamps)


def oscillation_amplitude(tr: Trajectory, window: int = 200) -> float:
    """Largest per-group range over the last ``window`` records."""
    return float(np.max(np.ptp(tr.p[-window:], axis=0)))


# --- configs ----------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkConfig:
    id: str
    groups: tuple[AgentGroup, ...]
    model: str = "discrete"
    T: float = 2000
    h: float = 0.01
    J: float = 1.0
    sample_every: float = 1.0
    thresholds: RegimeThresholds = RegimeThresholds()
    expected: Mapping[str, Any] = field(default_factory=dict)
    description: str = ""

    def __post_init__(self) -> None:
        if self.model not in ("discrete", "continuous"):
            raise NetworkError(f"model must be discrete or continuous, got {self.model!r}")
        total = sum(g.fraction for g in self.groups)
        if abs(total - 1.0) > 1e-9:
            raise NetworkError(f"config {self.id!r}: group fractions sum to {total}, expected 1")

    def run(self) -> Trajectory:
        if self.model == "discrete":
            return simulate_discrete(self.groups, int(self.T), self.J)
        return simulate_continuous(self.groups, self.T, self.h, self.J, self.sample_every)

    def to_dict(self) -> dict[str, Any]:
        th = self.thresholds
        return {
            "id": self.id,
            "description": self.description,
            "model": self.model,
            "T": self.T,
            "h": self.h,
            "J": self.J,
            "sample_every": self.sample_every,
            "groups": [
                {"f": g.f, "q0": g.q0, "epsilon": g.epsilon, "memory": g.memory, "fraction": g.fraction}
                for g in self.groups
            ],
            "thresholds": {
                "amplitude": th.amplitude,
                "period_tol": th.period_tol,
                "max_period": th.max_period,
                "perturbation": th.perturbation,
                "divergence": th.divergence,
                "min_length": th.min_length,
            },
            "expected": dict(self.expected),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "NetworkConfig":
        if "groups" not in d:
            raise NetworkError(f"config {d.get('id')!r}: missing field 'groups'")
        groups = tuple(
            AgentGroup(
                float(g["f"]),
                float(g["q0"]),
                float(g.get("epsilon", 0.0)),
                g.get("memory", LONG_TERM),
                float(g.get("fraction", 0.5)),
            )
            for g in d["groups"]
        )
        th = RegimeThresholds(**d.get("thresholds", {}))
        return cls(
            d.get("id", "network"),
            groups,
            d.get("model", "discrete"),
            d.get("T", 2000),
            float(d.get("h", 0.01)),
            float(d.get("J", 1.0)),
            float(d.get("sample_every", 1.0)),
            th,
            dict(d.get("expected", {})),
            d.get("description", ""),
        )


@dataclass(frozen=True)
class NetworkRun:
    """A simulated config with its regime and, when settled, fixed-point estimates."""

    config: NetworkConfig
    trajectory: Trajectory
    regime: RegimeReport
    solver: FixedPoint

    @property
    def fixed_point(self) -> tuple[float, ...] | None:
        if self.regime.overall != FIXED_POINT:
            return None
        return self.trajectory.final

    def summary(self) -> dict[str, Any]:
        tr = self.trajectory
        fp = self.fixed_point
        return {
            "id": self.config.id,
            "model": self.config.model,
            "T": self.config.T,
            "regime": self.regime.overall,
            "group_regimes": list(self.regime.groups),
            "mixed": self.regime.mixed,
            "periods": list(self.regime.periods),
            "final_p": [float(x) for x in tr.p[-1]],
            "final_q": [float(x) for x in tr.q[-1]],
            "fixed_point": None if fp is None else list(fp),
            "solver": {
                "converged": self.solver.converged,
                "p": list(self.solver.p),
                "q": list(self.solver.q),
                "residual": self.solver.residual,
                "iterations": self.solver.iterations,
            },
            "clamp_count": tr.clamp_count,
        }


def run_network(config: NetworkConfig) -> NetworkRun:
    tr = config.run()
    return NetworkRun(config, tr, classify_regime(tr, config.thresholds), fixed_point_solve(config.groups, J=config.J))


@dataclass(frozen=True)
class NetworkCheck:
    name: str
    passed: bool
    detail: str


def check_expectations(run: NetworkRun) -> tuple[NetworkCheck, ...]:
    """Compare a run against its config's ``expected`` block."""
    exp = run.config.expected
    tol = float(exp.get("tolerance", 0.005))
    p, q = run.trajectory.p[-1], run.trajectory.q[-1]
    out: list[NetworkCheck] = []

    def near(name: str, got: Sequence[float], want: Sequence[float]) -> None:
        err = max(abs(a - b) for a, b in zip(got, want))
        out.append(NetworkCheck(name, err <= tol + 1e-12, f"got {[round(float(x), 6) for x in got]}, want {list(want)}"))

    if "fixed_point" in exp:
        near("fixed_point", p, exp["fixed_point"])
    for j in range(len(p)):
        key = f"p{j + 1}"
        if key in exp:
            near(key, [p[j]], [exp[key]])
    if "q_star" in exp:
        near("q_star", q, exp["q_star"])
    if "regimes" in exp:
        got = list(run.regime.groups)
        out.append(NetworkCheck("regimes", got == list(exp["regimes"]), f"got {got}, want {exp['regimes']}"))
    if exp.get("consensus"):
        gap = abs(float(p[0] - p[-1]))
        out.append(NetworkCheck("consensus", gap <= tol, f"final gap {gap:.3g}"))
    return tuple(out)
