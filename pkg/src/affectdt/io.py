"""File ingestion, result emission and command dispatch.

Configs and fixtures are JSON; trajectories are CSV.  Every writer uses a
fixed field order and shortest round-trip float text, so identical inputs
give byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, TextIO

import numpy as np

from .attraction import AttractivenessRanking, attraction_from_ranking, quarter_law_check
from .decision import assemble, stochastic_optimum
from .network import (
    NetworkConfig,
    NetworkError,
    NetworkRun,
    RegimeThresholds,
    Trajectory,
    check_expectations,
    run_network,
)
from .paradox import Scenario, ScenarioError, ScenarioReport, run_scenario
from .qmeasure import SuiteReport, verify_suite
from .utility import utility_factor

FIXTURE_ENV = "AFFECTDT_FIXTURES"
COMMANDS = ("paradox", "network", "quarter-law", "qmeasure", "decide")
QUARTER_TOL = 0.005


class InputError(ValueError):
    pass


# --- locating and reading files ------------------------------------------------


def data_dir() -> Path:
    """Fixture root: ``$AFFECTDT_FIXTURES`` when set, else the packaged data."""
    env = os.environ.get(FIXTURE_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("affectdt") / "data"))


def read_json(path: str | os.PathLike[str]) -> Any:
    """Load JSON; syntax errors report the file, line, column and offending line."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        lines = text.splitlines()
        src = lines[e.lineno - 1] if 0 < e.lineno <= len(lines) else ""
        raise InputError(f"{p}:{e.lineno}:{e.colno}: {e.msg}\n    {src}") from None


def parse_scenario_file(path: str | os.PathLike[str]) -> Scenario:
    data = read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    try:
        return Scenario.from_dict(data)
    except (ScenarioError, ValueError, TypeError, KeyError) as e:
        raise InputError(f"{path}: {e}") from e


def load_catalog(directory: str | os.PathLike[str] | None = None) -> tuple[Scenario, ...]:
    """Every ``*.json`` scenario in ``directory`` (default: the fixture root), by file name."""
    root = Path(directory) if directory is not None else data_dir() / "scenarios"
    files = sorted(root.glob("*.json"))
    if not files:
        raise InputError(f"no scenario files in {root}")
    return tuple(parse_scenario_file(f) for f in files)


def load_tables(path: str | os.PathLike[str] | None = None) -> dict[str, Any]:
    return read_json(path if path is not None else data_dir() / "tables.json")


def resolve_network_config(name: str | os.PathLike[str]) -> Path:
    """A path as given, or a bare name like ``fig4`` looked up among shipped configs."""
    p = Path(name)
    if p.exists():
        return p
    stem = p.name if p.suffix == ".json" else p.name + ".json"
    shipped = data_dir() / "networks" / stem
    if shipped.exists():
        return shipped
    raise InputError(f"network config {str(name)!r} not found")


def parse_network_file(path: str | os.PathLike[str]) -> NetworkConfig:
    p = resolve_network_config(path)
    data = read_json(p)
    try:
        return NetworkConfig.from_dict(data)
    except (NetworkError, ValueError, TypeError, KeyError) as e:
        raise InputError(f"{p}: {e}") from e


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_scenario(s: Scenario, path: str | os.PathLike[str]) -> None:
    Path(path).write_text(dump_json(s.to_dict()), encoding="utf-8")


# --- emission ------------------------------------------------------------------


def _num(x: float | None) -> str:
    if x is None:
        return ""
    v = float(x)
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


def _clean(x: Any) -> Any:
    """JSON-safe copy: numpy scalars to floats, non-finite floats to strings."""
    if isinstance(x, Mapping):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    return x


def trajectory_rows(tr: Trajectory) -> tuple[list[str], list[list[str]]]:
    n = tr.p.shape[1] if tr.p.ndim == 2 and tr.p.size else len(tr.groups) or 2
    header = ["t"] + [f"{k}{j + 1}" for k in ("p", "q", "M") for j in range(n)]
    rows = []
    for i in range(len(tr.t)):
        rows.append([_num(tr.t[i])] + [_num(a[i, j]) for a in (tr.p, tr.q, tr.M) for j in range(n)])
    return header, rows


def entry_dict(e) -> dict[str, Any]:
    return {
        "key": e.key,
        "predicted": e.predicted,
        "computed": e.computed,
        "experimental": e.experimental,
        "tolerance": e.tolerance,
        "relative": e.relative,
        "error": e.error,
        "pass": e.passed,
        "gap": e.gap,
        "gap_ok": e.gap_ok,
    }


def paradox_summary(reports: Sequence[ScenarioReport]) -> dict[str, Any]:
    entries = [e for r in reports for e in r.entries]
    checks = [c for r in reports for c in r.checks]
    return {
        "scenarios": len(reports),
        "passed": sum(r.passed for r in reports),
        "failed": sum(not r.passed for r in reports),
        "entries": {"total": len(entries), "passed": sum(e.passed and e.gap_ok for e in entries)},
        "checks": {"total": len(checks), "passed": sum(c.passed for c in checks)},
        "results": [
            {
                "id": r.id,
                "pass": r.passed,
                "clamped_stages": list(r.clamped_stages),
                "entries": [entry_dict(e) for e in r.entries],
                "checks": [
                    {"op": c.op, "args": list(c.args), "pass": c.passed, "detail": c.detail} for c in r.checks
                ],
            }
            for r in reports
        ],
    }


def suite_summary(rep: SuiteReport) -> dict[str, Any]:
    return {
        "seed": rep.seed,
        "pass": rep.passed,
        "properties": [
            {
                "name": r.name,
                "instances": r.instances,
                "failures": r.failures,
                "worst": r.worst,
                "tolerance": r.tolerance,
                "pass": r.passed,
            }
            for r in rep.results
        ],
    }


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def emit_results(obj: Any, path: str | os.PathLike[str], format: str = "json") -> None:
    """Write a trajectory, network run, paradox reports, suite report or plain mapping.

    Trajectories (and network runs) go to CSV one row per time step; JSON for a
    network run is its summary.  Paradox reports in CSV have one row per
    expectation with predicted, computed, tolerance and pass columns.
    """
    if format not in ("csv", "json"):
        raise InputError(f"format must be csv or json, got {format!r}")
    text = _render(obj, format)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _render(obj: Any, format: str) -> str:
    if isinstance(obj, NetworkRun):
        if format == "csv":
            return _render(obj.trajectory, "csv")
        return dump_json(_clean(network_summary(obj)))
    if isinstance(obj, Trajectory):
        if format == "csv":
            return _csv_text(*trajectory_rows(obj))
        h, rows = trajectory_rows(obj)
        return dump_json({"columns": h, "rows": [[float(c) for c in r] for r in rows]})
    if isinstance(obj, ScenarioReport):
        obj = [obj]
    if isinstance(obj, (list, tuple)) and all(isinstance(r, ScenarioReport) for r in obj):
        if format == "json":
            return dump_json(_clean(paradox_summary(obj)))
        rows = [
            [r.id, e.key, _num(e.predicted), _num(e.computed), _num(e.experimental), _num(e.tolerance),
             "pass" if e.passed and e.gap_ok else "FAIL"]
            for r in obj
            for e in r.entries
        ]
        return _csv_text(["scenario", "key", "predicted", "computed", "experimental", "tolerance", "status"], rows)
    if isinstance(obj, SuiteReport):
        if format == "json":
            return dump_json(_clean(suite_summary(obj)))
        rows = [[r.name, str(r.instances), str(r.failures), _num(r.worst), _num(r.tolerance),
                 "pass" if r.passed else "FAIL"] for r in obj.results]
        return _csv_text(["property", "instances", "failures", "worst", "tolerance", "status"], rows)
    if isinstance(obj, Mapping):
        if format == "json":
            return dump_json(_clean(obj))
        rows = obj.get("rows")
        cols = obj.get("columns")
        if rows is None or cols is None:
            raise InputError("CSV output of a mapping needs 'columns' and 'rows'")
        return _csv_text(cols, [[_num(c) if isinstance(c, (int, float)) else str(c) for c in r] for r in rows])
    raise InputError(f"cannot emit object of type {type(obj).__name__}")


def network_summary(run: NetworkRun) -> dict[str, Any]:
    out = run.summary()
    out["checks"] = [{"name": c.name, "pass": c.passed, "detail": c.detail} for c in check_expectations(run)]
    return out


# --- table checks --------------------------------------------------------------


@dataclass(frozen=True)
class TableCheck:
    table: str
    column: str
    computed: float
    printed: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.computed - self.printed) <= self.tolerance + 1e-12


def quarter_law_tables(tables: Mapping[str, Any], tol: float = QUARTER_TOL) -> list[TableCheck]:
    """Mean ``|q|`` per table and session from ``(p, f)`` records, against the printed bottom line.

    Also reproduces the near-equal-utility table's column means.
    """
    out: list[TableCheck] = []
    for name in sorted(tables):
        t = tables[name]
        cols = t["columns"]
        rows = t["rows"]
        if "f" in cols and "p1" in cols:
            fi = cols.index("f")
            for s in ("1", "2"):
                pi = cols.index("p" + s)
                rep = quarter_law_check([(r[pi], r[fi]) for r in rows])
                out.append(TableCheck(name, "q" + s, rep.mean_abs_q, float(t["bottom"]["q" + s]), tol))
        elif "p_exp" in cols:
            for c in ("f", "p", "p_exp", "q_exp"):
                i = cols.index(c)
                mean = math.fsum(r[i] for r in rows) / len(rows)
                exact = c in ("f", "p")
                out.append(TableCheck(name, c, mean, float(t["bottom"][c]), 1e-12 if exact else tol))
    return out


# --- dispatch ------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple[str, ...] = ()
    output: str | None = None
    format: str = "json"
    seed: int = 0
    beta: float | None = None
    base: float | None = None
    T: float | None = None
    h: float | None = None
    thresholds: Mapping[str, Any] = field(default_factory=dict)
    options: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        if self.format not in ("csv", "json"):
            raise InputError(f"format must be csv or json, got {self.format!r}")
        if self.beta is not None and math.isnan(self.beta):
            raise InputError("beta must be a number")
        if self.base is not None and not self.base > 1.0:
            raise InputError(f"quality base must exceed 1, got {self.base}")
        if self.T is not None and not self.T >= 1:
            raise InputError(f"T must be at least 1, got {self.T}")
        if self.h is not None and not self.h > 0:
            raise InputError(f"h must be positive, got {self.h}")
        if self.seed < 0:
            raise InputError("seed must be nonnegative")
        allowed = {f.name for f in dataclasses.fields(RegimeThresholds)}
        unknown = set(self.thresholds) - allowed
        if unknown:
            raise InputError(f"unknown threshold(s) {sorted(unknown)}; allowed {sorted(allowed)}")
        for p in self.inputs:
            if self.command == "network":
                resolve_network_config(p)
            elif not Path(p).exists():
                raise InputError(f"input {p!r} does not exist")


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    line = lambda r: "  ".join(str(x).ljust(w) for x, w in zip(r, widths)).rstrip()
    return "\n".join([line(header), line(["-" * w for w in widths])] + [line(r) for r in rows]) + "\n"


def _fmt(x: float | None, digits: int = 4) -> str:
    return "-" if x is None else f"{x:.{digits}f}"


def _run_paradox(cfg: RunConfig, out: TextIO) -> int:
    if cfg.inputs:
        scenarios = [parse_scenario_file(p) for p in cfg.inputs]
    else:
        scenarios = list(load_catalog(cfg.options.get("fixtures")))
        names = cfg.options.get("names") or ()
        if names:
            known = {s.id for s in scenarios}
            missing = [n for n in names if n not in known]
            if missing:
                raise InputError(f"unknown scenario(s) {missing}; have {sorted(known)}")
            scenarios = [s for s in scenarios if s.id in names]
    over = {k: v for k, v in (("beta", cfg.beta), ("base", cfg.base)) if v is not None}
    if over:
        scenarios = [dataclasses.replace(s, **over) for s in scenarios]
    reports = [run_scenario(s) for s in scenarios]
    rows = [
        [
            r.id,
            f"{sum(e.passed and e.gap_ok for e in r.entries)}/{len(r.entries)}",
            f"{sum(c.passed for c in r.checks)}/{len(r.checks)}",
            ",".join(r.clamped_stages) or "-",
            "PASS" if r.passed else "FAIL",
        ]
        for r in reports
    ]
    out.write(_table(["scenario", "values", "checks", "clamped", "status"], rows))
    passed = sum(r.passed for r in reports)
    out.write(f"{passed}/{len(reports)} scenarios pass\n")
    if cfg.output:
        emit_results(reports, cfg.output, cfg.format)
    return 0 if passed == len(reports) else 1


def _run_network(cfg: RunConfig, out: TextIO) -> int:
    if len(cfg.inputs) != 1:
        raise InputError("network simulate needs exactly one --config")
    conf = parse_network_file(cfg.inputs[0])
    over: dict[str, Any] = {}
    if cfg.T is not None:
        over["T"] = cfg.T
    if cfg.h is not None:
        over["h"] = cfg.h
    if cfg.thresholds:
        over["thresholds"] = dataclasses.replace(conf.thresholds, **cfg.thresholds)
    if over:
        conf = dataclasses.replace(conf, **over)
    run = run_network(conf)
    checks = check_expectations(run)
    traj_path = Path(cfg.output) if cfg.output else Path(f"{conf.id}.csv")
    emit_results(run, traj_path, "csv")
    summary_path = traj_path.with_suffix(".summary.json")
    emit_results(run, summary_path, "json")
    p = run.trajectory.p[-1]
    rows = [
        [f"group {j + 1}", run.regime.groups[j], _fmt(float(p[j]), 5), _fmt(float(run.trajectory.q[-1][j]), 5)]
        for j in range(len(p))
    ]
    out.write(_table(["", "regime", "p(T)", "q(T)"], rows))
    out.write(f"regime: {run.regime.overall}{' (mixed)' if run.regime.mixed else ''}\n")
    for c in checks:
        out.write(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}\n")
    out.write(f"trajectory: {traj_path}\nsummary: {summary_path}\n")
    return 0 if all(c.passed for c in checks) else 1


def _run_qmeasure(cfg: RunConfig, out: TextIO) -> int:
    rep = verify_suite(cfg.seed, int(cfg.options.get("instances", 100)))
    rows = [[r.name, str(r.instances), str(r.failures), f"{r.worst:.2e}", "PASS" if r.passed else "FAIL"]
            for r in rep.results]
    out.write(_table(["property", "instances", "failures", "worst", "status"], rows))
    out.write(f"seed {rep.seed}: {'all properties hold' if rep.passed else 'FAILURES'}\n")
    if cfg.output:
        emit_results(rep, cfg.output, cfg.format)
    return 0 if rep.passed else 1


def _run_quarter_law(cfg: RunConfig, out: TextIO) -> int:
    tables = load_tables(cfg.inputs[0] if cfg.inputs else None)
    checks = quarter_law_tables(tables)
    rows = [[c.table, c.column, _fmt(c.computed), _fmt(c.printed, 2), "PASS" if c.passed else "FAIL"] for c in checks]
    out.write(_table(["table", "column", "computed", "printed", "status"], rows))
    if cfg.output:
        data = {"columns": ["table", "column", "computed", "printed", "tolerance", "pass"],
                "rows": [[c.table, c.column, c.computed, c.printed, c.tolerance, str(c.passed).lower()] for c in checks]}
        emit_results(data, cfg.output, cfg.format)
    return 0 if all(c.passed for c in checks) else 1


def _run_decide(cfg: RunConfig, out: TextIO) -> int:
    utilities = cfg.options.get("utilities")
    if not utilities:
        raise InputError("decide needs --utilities")
    n = len(utilities)
    labels = cfg.options.get("labels") or [f"A{i + 1}" for i in range(n)]
    order = cfg.options.get("order")
    ranking = AttractivenessRanking.strict(order) if order else AttractivenessRanking.neutral(n)
    f = utility_factor(utilities, cfg.beta if cfg.beta is not None else 0.0)
    q = attraction_from_ranking(ranking) if not ranking.is_neutral else np.zeros(n)
    prob = assemble(f, q, labels)
    best = stochastic_optimum(prob)
    rows = [[labels[i], _fmt(utilities[i]), _fmt(f[i]), _fmt(q[i]), _fmt(prob.p[i])] for i in range(n)]
    out.write(_table(["alternative", "U", "f", "q", "p"], rows))
    out.write(f"stochastically optimal: {labels[best.index]}{' (tied)' if best.tied else ''}\n")
    if cfg.output:
        data = {"columns": ["alternative", "U", "f", "q", "p"],
                "rows": [[labels[i], float(utilities[i]), float(f[i]), float(q[i]), float(prob.p[i])] for i in range(n)]}
        emit_results(data, cfg.output, cfg.format)
    return 0


_DISPATCH = {
    "paradox": _run_paradox,
    "network": _run_network,
    "qmeasure": _run_qmeasure,
    "quarter-law": _run_quarter_law,
    "decide": _run_decide,
}


def run(config: RunConfig, out: TextIO | None = None) -> int:
    """Dispatch one command; 0 iff every check it runs passes."""
    stream = out if out is not None else sys.stdout
    try:
        return _DISPATCH[config.command](config, stream)
    except (InputError, ScenarioError, NetworkError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
