"""Scenario engine for the classic choice paradoxes.

A scenario is a list of stages.  Each stage is one decision among named
alternatives: its utility factors come from lotteries, raw utilities, given
fractions, a conditional table, observed choices, or another stage, and its
attraction factors come from lottery quality, a declared ranking, or nothing.
Expected entries then compare the computed numbers with printed predictions
and, where available, experimental fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .attraction import (
    QUALITY_BASE,
    AttractivenessRanking,
    attraction_from_ranking,
    lottery_quality,
    rank_lotteries,
)
from .core import (
    LINEAR,
    Lottery,
    UtilityFunction,
    expected_utility,
    logarithmic,
    mix,
    square_root,
)
from .decision import DecisionProblem, assemble
from .utility import stpetersburg_analysis, utility_factor

GAP_SLACK = 0.01
_EDGE = 1e-9

UTILITY_SOURCES = ("lotteries", "utilities", "given", "conditional", "observed", "stage")
ATTRACTION_SOURCES = ("quality", "ranking", "neutral")
SCENARIO_KINDS = ("choice", "st_petersburg", "qualitative")
CHECK_OPS = ("prefers", "more_useful", "more_attractive", "interior", "equal", "divergent", "negative_beta")
DERIVED_OPS = ("diff", "mean")

_UTILITY_FUNCTIONS = {"linear": lambda: LINEAR, "logarithmic": logarithmic, "square_root": square_root}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ConditionalTable:
    """``given[i][a] = f(A_i | B_a)`` with prior ``f(B_a)``."""

    id: str
    actions: tuple[str, ...]
    conditions: tuple[str, ...]
    given: tuple[tuple[float, ...], ...]
    prior: tuple[float, ...]

    def __post_init__(self) -> None:
        g = np.asarray(self.given, dtype=float)
        if g.shape != (len(self.actions), len(self.conditions)):
            raise ScenarioError(f"table {self.id!r}: shape {g.shape} does not match labels")
        if np.any(g < 0) or np.any(g > 1) or np.any(np.abs(g.sum(axis=0) - 1.0) > _EDGE):
            raise ScenarioError(f"table {self.id!r}: conditional columns must be distributions")
        pr = np.asarray(self.prior, dtype=float)
        if pr.shape != (len(self.conditions),) or np.any(pr < 0) or abs(pr.sum() - 1.0) > _EDGE:
            raise ScenarioError(f"table {self.id!r}: prior must be a distribution over conditions")


def compose_conditional(table: ConditionalTable) -> np.ndarray:
    """Total probability ``f(A_i B) = sum_a f(A_i|B_a) f(B_a)``."""
    return np.asarray(table.given, dtype=float) @ np.asarray(table.prior, dtype=float)


@dataclass(frozen=True)
class Mixture:
    label: str
    first: str
    second: str
    alpha: float


@dataclass(frozen=True)
class Ranking:
    id: str
    groups: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class UtilitySource:
    kind: str
    values: tuple[float, ...] | None = None
    ref: str | None = None


@dataclass(frozen=True)
class AttractionSource:
    kind: str
    ref: str | None = None


@dataclass(frozen=True)
class Stage:
    id: str
    alternatives: tuple[str, ...]
    utility: UtilitySource
    attraction: AttractionSource


@dataclass(frozen=True)
class Expectation:
    """``key`` is ``stage.quantity.label`` or a derived name; ``#tag`` suffixes are ignored."""

    key: str
    predicted: float
    experimental: float | None = None
    tolerance: float = 0.005
    relative: bool = False
    note: str = ""


@dataclass(frozen=True)
class Derived:
    name: str
    op: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Check:
    op: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Scenario:
    id: str
    kind: str = "choice"
    description: str = ""
    beta: float = 0.0
    base: float = QUALITY_BASE
    utility_function: str = "linear"
    max_n: int = 64
    renormalize: bool = True
    lotteries: tuple[Lottery, ...] = ()
    mixtures: tuple[Mixture, ...] = ()
    conditional_tables: tuple[ConditionalTable, ...] = ()
    rankings: tuple[Ranking, ...] = ()
    stages: tuple[Stage, ...] = ()
    derived: tuple[Derived, ...] = ()
    expected: tuple[Expectation, ...] = ()
    checks: tuple[Check, ...] = ()
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ScenarioError(f"scenario {self.id!r}: unknown kind {self.kind!r}")
        if self.utility_function not in _UTILITY_FUNCTIONS:
            raise ScenarioError(f"scenario {self.id!r}: unknown utility function {self.utility_function!r}")
        names = [l.label for l in self.lotteries] + [m.label for m in self.mixtures]
        if len(set(names)) != len(names):
            raise ScenarioError(f"scenario {self.id!r}: duplicate lottery labels")
        tables = {t.id for t in self.conditional_tables}
        rankings = {r.id for r in self.rankings}
        stage_ids: list[str] = []
        for st in self.stages:
            where = f"scenario {self.id!r} stage {st.id!r}"
            if st.utility.kind not in UTILITY_SOURCES:
                raise ScenarioError(f"{where}: unknown utility source {st.utility.kind!r}")
            if st.attraction.kind not in ATTRACTION_SOURCES:
                raise ScenarioError(f"{where}: unknown attraction source {st.attraction.kind!r}")
            if st.utility.kind in ("lotteries",) or st.attraction.kind == "quality":
                missing = [a for a in st.alternatives if a not in names]
                if missing:
                    raise ScenarioError(f"{where}: missing lotteries {missing}")
            if st.utility.kind in ("utilities", "given", "observed"):
                if st.utility.values is None or len(st.utility.values) != len(st.alternatives):
                    raise ScenarioError(f"{where}: missing field 'values' for {st.utility.kind} utility")
            if st.utility.kind == "conditional" and st.utility.ref not in tables:
                raise ScenarioError(f"{where}: missing conditional table {st.utility.ref!r}")
            if st.utility.kind == "stage" and st.utility.ref not in stage_ids:
                raise ScenarioError(f"{where}: utility refers to unknown earlier stage {st.utility.ref!r}")
            if st.attraction.kind == "ranking" and st.attraction.ref not in rankings:
                raise ScenarioError(f"{where}: missing ranking {st.attraction.ref!r}")
            if st.utility.kind == "observed" and st.attraction.kind == "neutral":
                raise ScenarioError(f"{where}: observed choices need a ranking to separate f from q")
            stage_ids.append(st.id)
        for e in self.expected:
            if e.tolerance <= 0:
                raise ScenarioError(f"scenario {self.id!r}: tolerance for {e.key!r} must be positive")
        for c in self.checks:
            if c.op not in CHECK_OPS:
                raise ScenarioError(f"scenario {self.id!r}: unknown check {c.op!r}")
        for d in self.derived:
            if d.op not in DERIVED_OPS:
                raise ScenarioError(f"scenario {self.id!r}: unknown derived op {d.op!r}")

    def to_dict(self) -> dict[str, Any]:
        return _scenario_to_dict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Scenario":
        return _scenario_from_dict(data)


# --- evaluation -----------------------------------------------------------


@dataclass(frozen=True)
class StageResult:
    id: str
    problem: DecisionProblem
    utilities: tuple[float, ...] | None = None
    qualities: tuple[float, ...] | None = None

    def quantity(self, name: str, label: str) -> float:
        i = self.problem.index(label)
        if name in ("p", "f", "q"):
            return float(getattr(self.problem, name)[i])
        if name == "U" and self.utilities is not None:
            return self.utilities[i]
        if name == "Q" and self.qualities is not None:
            return self.qualities[i]
        raise ScenarioError(f"stage {self.id!r} has no quantity {name!r}")


@dataclass(frozen=True)
class EntryResult:
    key: str
    computed: float
    predicted: float
    experimental: float | None
    tolerance: float
    relative: bool

    @property
    def error(self) -> float:
        return abs(self.computed - self.predicted)

    @property
    def passed(self) -> bool:
        bound = self.tolerance * abs(self.predicted) if self.relative else self.tolerance
        # printed predictions are rounded; an exact half-step miss still counts
        return self.error <= bound + _EDGE

    @property
    def gap(self) -> float | None:
        return None if self.experimental is None else abs(self.computed - self.experimental)

    @property
    def gap_ok(self) -> bool:
        if self.experimental is None:
            return True
        return self.gap <= abs(self.predicted - self.experimental) + GAP_SLACK + _EDGE


@dataclass(frozen=True)
class CheckResult:
    op: str
    args: tuple[str, ...]
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ScenarioReport:
    id: str
    entries: tuple[EntryResult, ...]
    checks: tuple[CheckResult, ...]
    stages: tuple[StageResult, ...] = ()
    values: Mapping[str, float] = field(default_factory=dict)
    clamped_stages: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(e.passed and e.gap_ok for e in self.entries) and all(c.passed for c in self.checks)

    def stage(self, stage_id: str) -> StageResult:
        for s in self.stages:
            if s.id == stage_id:
                return s
        raise KeyError(stage_id)

    def value(self, key: str) -> float:
        return _lookup(key, {s.id: s for s in self.stages}, self.values)


def _lookup(key: str, stages: Mapping[str, StageResult], values: Mapping[str, float]) -> float:
    key = key.split("#", 1)[0]
    if key in values:
        return values[key]
    parts = key.split(".")
    if len(parts) != 3 or parts[0] not in stages:
        raise ScenarioError(f"cannot resolve quantity {key!r}")
    return stages[parts[0]].quantity(parts[1], parts[2])


def _resolve_lotteries(s: Scenario) -> dict[str, Lottery]:
    out = {l.label: l for l in s.lotteries}
    for m in s.mixtures:
        if m.first not in out or m.second not in out:
            raise ScenarioError(f"mixture {m.label!r} refers to unknown lotteries")
        out[m.label] = mix(out[m.first], out[m.second], m.alpha, m.label)
    return out


def _ranking_indices(r: Ranking, labels: Sequence[str]) -> AttractivenessRanking:
    try:
        groups = tuple(tuple(labels.index(a) for a in g) for g in r.groups)
    except ValueError:
        raise ScenarioError(f"ranking {r.id!r} names alternatives outside {tuple(labels)}") from None
    return AttractivenessRanking(groups)


def _run_stage(
    st: Stage,
    s: Scenario,
    lots: Mapping[str, Lottery],
    done: Mapping[str, StageResult],
    u: UtilityFunction,
) -> StageResult:
    labels = list(st.alternatives)
    n = len(labels)
    utilities = qualities = None
    if st.attraction.kind == "quality" or st.utility.kind == "lotteries":
        chosen = [lots[a] for a in labels]
        utilities = tuple(expected_utility(l, u) for l in chosen)
        qualities = tuple(lottery_quality(l, u, s.base) for l in chosen)

    if st.attraction.kind == "neutral" or n < 2:
        q = np.zeros(n)
    elif st.attraction.kind == "quality":
        q = attraction_from_ranking(rank_lotteries([lots[a] for a in labels], u, s.base))
    else:
        ranking = next(r for r in s.rankings if r.id == st.attraction.ref)
        q = attraction_from_ranking(_ranking_indices(ranking, labels))

    kind = st.utility.kind
    if kind == "lotteries":
        f = utility_factor(utilities, s.beta)
    elif kind == "utilities":
        utilities = tuple(float(v) for v in st.utility.values)
        f = utility_factor(utilities, s.beta)
    elif kind == "given":
        f = np.asarray(st.utility.values, dtype=float)
    elif kind == "conditional":
        table = next(t for t in s.conditional_tables if t.id == st.utility.ref)
        if tuple(labels) != table.actions:
            raise ScenarioError(f"stage {st.id!r}: alternatives must match table actions {table.actions}")
        f = compose_conditional(table)
    elif kind == "observed":
        f = np.asarray(st.utility.values, dtype=float) - q
    else:
        f = done[st.utility.ref].problem.f.copy()
        if len(f) != n:
            raise ScenarioError(f"stage {st.id!r}: borrowed utility factors have the wrong length")
    return StageResult(st.id, assemble(f, q, labels, s.renormalize), utilities, qualities)


def _eval_derived(d: Derived, stages: Mapping[str, StageResult], values: Mapping[str, float]) -> float:
    xs = [_lookup(a, stages, values) for a in d.args]
    if d.op == "diff":
        if len(xs) != 2:
            raise ScenarioError(f"derived {d.name!r}: diff takes two arguments")
        return xs[0] - xs[1]
    return math.fsum(xs) / len(xs)


def _eval_check(c: Check, stages: Mapping[str, StageResult], values: Mapping[str, float]) -> CheckResult:
    a = c.args
    if c.op in ("prefers", "more_useful", "more_attractive"):
        qty = {"prefers": "p", "more_useful": "f", "more_attractive": "q"}[c.op]
        x, y = stages[a[0]].quantity(qty, a[1]), stages[a[0]].quantity(qty, a[2])
        return CheckResult(c.op, a, x > y, f"{qty}({a[1]})={x:.6g} vs {qty}({a[2]})={y:.6g}")
    if c.op == "interior":
        p = stages[a[0]].problem.p
        return CheckResult(c.op, a, bool(np.all((p > 0) & (p < 1))), f"p={np.round(p, 6).tolist()}")
    if c.op == "equal":
        x, y = _lookup(a[0], stages, values), _lookup(a[1], stages, values)
        return CheckResult(c.op, a, abs(x - y) <= 1e-12, f"{x:.12g} vs {y:.12g}")
    if c.op == "divergent":
        ok = values.get("divergent", 0.0) == 1.0
        return CheckResult(c.op, a, ok)
    beta = values.get("beta")
    return CheckResult(c.op, a, beta is not None and beta < 0, f"beta={beta}")


def run_scenario(s: Scenario) -> ScenarioReport:
    u = _UTILITY_FUNCTIONS[s.utility_function]()
    values: dict[str, float] = {}
    if s.kind == "st_petersburg":
        rep = stpetersburg_analysis(s.max_n, u)
        values["divergent"] = 1.0 if rep.divergent else 0.0
        if rep.divergent:
            values.update(n_opt=rep.n_opt, beta=rep.beta_estimate, optimal_utility=rep.optimal_utility)

    lots = _resolve_lotteries(s)
    done: dict[str, StageResult] = {}
    for st in s.stages:
        done[st.id] = _run_stage(st, s, lots, done, u)
    for d in s.derived:
        values[d.name] = _eval_derived(d, done, values)

    entries = tuple(
        EntryResult(e.key, _lookup(e.key, done, values), e.predicted, e.experimental, e.tolerance, e.relative)
        for e in s.expected
    )
    checks = tuple(_eval_check(c, done, values) for c in s.checks)
    clamped = tuple(sid for sid, r in done.items() if r.problem.clamp_flag)
    return ScenarioReport(s.id, entries, checks, tuple(done.values()), values, clamped)


# --- Ellsberg closed forms --------------------------------------------------


@dataclass(frozen=True)
class EllsbergPoint:
    urn_p: float
    closed_form: tuple[float, float, float, float]
    assembled: tuple[float, float, float, float]
    clamp_flags: tuple[bool, bool]
    diff12: float
    diff34: float


def ellsberg_curves(grid: Sequence[float]) -> list[EllsbergPoint]:
    """Behavioral probabilities of the two-urn lotteries along the unknown red share.

    ``closed_form`` holds the raw formulas (which leave [0, 1] near the ends);
    ``assembled`` runs the same pairs through :func:`assemble` with retraction.
    """
    out = []
    quarter = (0.25, -0.25)
    for x in grid:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"urn parameter {x} outside [0, 1]")
        cf = (
            (5 + 2 * x) / (4 * (1 + 2 * x)),
            (6 * x - 1) / (4 * (1 + 2 * x)),
            (7 - 2 * x) / (4 * (3 - 2 * x)),
            (5 - 6 * x) / (4 * (3 - 2 * x)),
        )
        l1 = Lottery((1.0, 0.0), (0.5, 0.5))
        l2 = Lottery((1.0, 0.0), (x, 1.0 - x))
        l3 = Lottery((0.0, 1.0), (0.5, 0.5))
        l4 = Lottery((0.0, 1.0), (x, 1.0 - x))
        a = assemble(utility_factor([expected_utility(l1), expected_utility(l2)]), quarter)
        b = assemble(utility_factor([expected_utility(l3), expected_utility(l4)]), quarter)
        out.append(
            EllsbergPoint(
                float(x),
                cf,
                (float(a.p[0]), float(a.p[1]), float(b.p[0]), float(b.p[1])),
                (a.clamp_flag, b.clamp_flag),
                (3 - 2 * x) / (2 * (1 + 2 * x)),
                (1 + 2 * x) / (2 * (3 - 2 * x)),
            )
        )
    return out


# --- (de)serialization --------------------------------------------------------


def _need(d: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in d:
        raise ScenarioError(f"{where}: missing field {key!r}")
    return d[key]


def _scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    sid = _need(data, "id", "scenario")
    where = f"scenario {sid!r}"
    lots = []
    mixes = []
    for i, ld in enumerate(data.get("lotteries", [])):
        label = _need(ld, "label", f"{where} lottery #{i}")
        if "mix" in ld:
            a, b = ld["mix"]
            mixes.append(Mixture(label, a, b, float(_need(ld, "alpha", f"{where} lottery {label!r}"))))
        else:
            lots.append(
                Lottery(
                    tuple(_need(ld, "payoffs", f"{where} lottery {label!r}")),
                    tuple(_need(ld, "probs", f"{where} lottery {label!r}")),
                    label,
                )
            )
    tables = tuple(
        ConditionalTable(
            _need(t, "id", f"{where} table"),
            tuple(_need(t, "actions", f"{where} table")),
            tuple(_need(t, "conditions", f"{where} table")),
            tuple(tuple(row) for row in _need(t, "given", f"{where} table")),
            tuple(_need(t, "prior", f"{where} table")),
        )
        for t in data.get("conditional_tables", [])
    )
    rankings = tuple(
        Ranking(_need(r, "id", f"{where} ranking"), tuple(tuple(g) for g in _need(r, "groups", f"{where} ranking")))
        for r in data.get("rankings", [])
    )
    stages = []
    for st in data.get("stages", []):
        sw = f"{where} stage {st.get('id')!r}"
        ud = _need(st, "utility", sw)
        ad = _need(st, "attraction", sw)
        vals = ud.get("values")
        stages.append(
            Stage(
                _need(st, "id", sw),
                tuple(_need(st, "alternatives", sw)),
                UtilitySource(_need(ud, "from", sw), tuple(vals) if vals is not None else None, ud.get("ref")),
                AttractionSource(_need(ad, "from", sw), ad.get("ref")),
            )
        )
    expected = tuple(
        Expectation(
            key,
            float(_need(e, "predicted", f"{where} expected {key!r}")),
            None if e.get("experimental") is None else float(e["experimental"]),
            float(e.get("tolerance", 0.005)),
            bool(e.get("relative", False)),
            e.get("note", ""),
        )
        for key, e in data.get("expected", {}).items()
    )
    derived = tuple(
        Derived(name, _need(d, "op", f"{where} derived {name!r}"), tuple(_need(d, "args", f"{where} derived {name!r}")))
        for name, d in data.get("derived", {}).items()
    )
    checks = tuple(Check(_need(c, "op", f"{where} check"), tuple(c.get("args", []))) for c in data.get("checks", []))
    return Scenario(
        id=sid,
        kind=data.get("kind", "choice"),
        description=data.get("description", ""),
        beta=float(data.get("beta", 0.0)),
        base=float(data.get("base", QUALITY_BASE)),
        utility_function=data.get("utility_function", "linear"),
        max_n=int(data.get("max_n", 64)),
        renormalize=bool(data.get("renormalize", True)),
        lotteries=tuple(lots),
        mixtures=tuple(mixes),
        conditional_tables=tables,
        rankings=rankings,
        stages=tuple(stages),
        derived=derived,
        expected=expected,
        checks=checks,
        provenance=data.get("provenance", ""),
    )


def _scenario_to_dict(s: Scenario) -> dict[str, Any]:
    out: dict[str, Any] = {
        "id": s.id,
        "kind": s.kind,
        "description": s.description,
        "provenance": s.provenance,
        "beta": s.beta,
        "base": s.base,
        "utility_function": s.utility_function,
    }
    if s.kind == "st_petersburg":
        out["max_n"] = s.max_n
    if not s.renormalize:
        out["renormalize"] = False
    out["lotteries"] = [{"label": l.label, "payoffs": list(l.payoffs), "probs": list(l.probs)} for l in s.lotteries] + [
        {"label": m.label, "mix": [m.first, m.second], "alpha": m.alpha} for m in s.mixtures
    ]
    out["conditional_tables"] = [
        {
            "id": t.id,
            "actions": list(t.actions),
            "conditions": list(t.conditions),
            "given": [list(r) for r in t.given],
            "prior": list(t.prior),
        }
        for t in s.conditional_tables
    ]
    out["rankings"] = [{"id": r.id, "groups": [list(g) for g in r.groups]} for r in s.rankings]
    stages = []
    for st in s.stages:
        ud: dict[str, Any] = {"from": st.utility.kind}
        if st.utility.values is not None:
            ud["values"] = list(st.utility.values)
        if st.utility.ref is not None:
            ud["ref"] = st.utility.ref
        ad: dict[str, Any] = {"from": st.attraction.kind}
        if st.attraction.ref is not None:
            ad["ref"] = st.attraction.ref
        stages.append({"id": st.id, "alternatives": list(st.alternatives), "utility": ud, "attraction": ad})
    out["stages"] = stages
    out["derived"] = {d.name: {"op": d.op, "args": list(d.args)} for d in s.derived}
    exp = {}
    for e in s.expected:
        ed: dict[str, Any] = {"predicted": e.predicted, "experimental": e.experimental, "tolerance": e.tolerance}
        if e.relative:
            ed["relative"] = True
        if e.note:
            ed["note"] = e.note
        exp[e.key] = ed
    out["expected"] = exp
    out["checks"] = [{"op": c.op, "args": list(c.args)} for c in s.checks]
    return out
