"""One test per acceptance criterion; each records a PASS/FAIL line shown in the run summary."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from affectdt.attraction import base_from_scaling, ladder_gap, ladder_priors
from affectdt.cli import main
from affectdt.io import load_catalog, load_tables, parse_network_file, quarter_law_tables
from affectdt.network import (
    FIXED_POINT,
    PERIODIC,
    CHAOTIC,
    classify_regime,
    fixed_point_solve,
    kl_gain,
    run_network,
    simulate_continuous,
    simulate_discrete,
)
from affectdt.paradox import run_scenario
from affectdt.qmeasure import PROPERTIES, verify_suite
from affectdt.utility import stpetersburg_analysis

EDGE = 1e-9  # printed values sit exactly on the 0.005 boundary in two places

PRINTED_P = {
    "allais": {"first.p.L1": 0.67, "first.p.L2": 0.33},
    "prisoner": {"unknown.p.A1B": 0.35, "unknown.p.A2B": 0.65},
    "disjunction_gamble": {"unknown.p.A1B": 0.39, "unknown.p.A2B": 0.61},
    "disjunction_vacation": {"unknown.p.A1B": 0.31, "unknown.p.A2B": 0.69},
    "conjunction": {"single.p.A1": 0.25, "pairs.p.A1B1": 0.375, "epsilon": 0.125},
    "planning": {"act.p.B1": 0.35},
    "ariely": {"priced.p.L1": 0.75, "priced.p.L2": 0.25, "free.p.L3": 0.25, "free.p.L4": 0.75},
    "decoy_ovens": {"with_decoy.p.A": 0.65, "with_decoy.p.B": 0.35},
    "decoy_frogs": {"with_decoy.p.A": 0.6, "with_decoy.p.B": 0.4},
    "disposition": {"gains.p.L2": 0.75},
    "preference_reversal": {"choose.p.L1": 0.694, "choose.p.L2": 0.306},
    "intransitivity": {"AB.p.A": 0.528, "BC.p.B": 0.537, "CA.p.C": 0.685},
}

PRINTED_Q = {
    ("kt_buridan", "example.Q.L1"): 30.3,
    ("kt_buridan", "example.Q.L2"): 72.0,
    ("allais", "first.Q.L1"): 30.0,
    ("allais", "first.Q.L2"): 27.7,
    ("preference_reversal", "choose.Q.L1"): 82.2,
    ("preference_reversal", "choose.Q.L2"): 58.4,
    ("disposition", "gains.Q.L1"): 5.5,
    ("disposition", "gains.Q.L2"): 15.0,
}


def reports():
    return {s.id: run_scenario(s) for s in load_catalog()}


def test_criterion_1_paradox_suite(criterion):
    t0 = time.perf_counter()
    reps = reports()
    elapsed = time.perf_counter() - t0
    worst, bad = 0.0, []
    for sid, values in PRINTED_P.items():
        for key, want in values.items():
            err = abs(reps[sid].value(key) - want)
            worst = max(worst, err)
            if err > 0.005 + EDGE:
                bad.append(f"{sid}:{key}")
    failing = [sid for sid, r in reps.items() if not r.passed]
    ok = not bad and not failing and elapsed < 1.0
    criterion(1, ok, f"{sum(map(len, PRINTED_P.values()))} values, worst error {worst:.4f}, "
                     f"{len(reps)} scenarios, {elapsed:.2f} s")
    assert not bad, bad
    assert not failing, failing
    assert elapsed < 1.0


def test_criterion_2_table1(criterion):
    r = reports()["kt_buridan"]
    mean_f, mean_p = r.value("mean_f"), r.value("mean_p")
    stored = {c.column: c for c in quarter_law_tables(load_tables()) if c.table == "table1"}
    p_exp, q_exp = stored["p_exp"], stored["q_exp"]
    ok = (
        mean_f == 0.5
        and mean_p == 0.75
        and abs(p_exp.computed - 0.77) <= 0.005
        and abs(q_exp.computed - 0.27) <= 0.005
        and stored["f"].passed
        and stored["p"].passed
    )
    criterion(2, ok, f"f={mean_f} p={mean_p} p_exp={p_exp.computed:.4f} q_exp={q_exp.computed:.4f}")
    assert ok


def test_criterion_3_quarter_law(criterion):
    printed = {("table2", "q1"): 0.22, ("table2", "q2"): 0.22, ("table3", "q1"): 0.21,
               ("table3", "q2"): 0.22, ("table4", "q1"): 0.22, ("table4", "q2"): 0.22}
    got = {(c.table, c.column): c.computed for c in quarter_law_tables(load_tables())}
    errs = {k: abs(got[k] - v) for k, v in printed.items()}
    ok = max(errs.values()) <= 0.005
    criterion(3, ok, " ".join(f"{t[-1]}/{c}={got[(t, c)]:.4f}" for t, c in printed))
    assert ok, errs


def test_criterion_4_ladder(criterion):
    problems = []
    for n in range(2, 13):
        q = ladder_priors(n)
        if n % 2 == 0:
            want = tuple(Fraction(n - 2 * r + 1, 2 * n) for r in range(1, n + 1))
        else:
            want = tuple(Fraction(n * (n - 2 * r + 1), 2 * (n * n - 1)) for r in range(1, n + 1))
        if q != want or not all(isinstance(x, Fraction) for x in q):
            problems.append(f"N={n} values")
        if sum(q) != 0:
            problems.append(f"N={n} alternation")
        if {q[i] - q[i + 1] for i in range(n - 1)} != {ladder_gap(n)}:
            problems.append(f"N={n} gap")
        if sum(abs(x) for x in q) / n != Fraction(1, 4):
            problems.append(f"N={n} mean |q|")
    criterion(4, not problems, "exact rationals, zero sum, uniform gap, mean |q| = 1/4 for N=2..12"
              if not problems else ", ".join(problems))
    assert not problems


def test_criterion_5_quality(criterion):
    reps = reports()
    rel = {k: abs(reps[k[0]].value(k[1]) / v - 1) for k, v in PRINTED_Q.items()}
    base = base_from_scaling(10, 0.75)
    q_ok = max(rel.values()) <= 0.005
    exact = base == 30
    status = "PASS" if q_ok and exact else ("XFAIL" if q_ok else "FAIL")
    criterion(5, q_ok and exact, f"Q worst relative error {max(rel.values()):.4f}; "
              f"base_from_scaling(10, 0.75) = {base:.4f}, rounds to {round(base)}", status)
    assert q_ok, rel
    assert round(base) == 30


@pytest.mark.xfail(strict=True, reason="the closed form gives 10**(40/27) = 30.30; 30 is its rounded value")
def test_criterion_5_exact_base():
    assert base_from_scaling(10, 0.75) == 30


def test_criterion_6_st_petersburg(criterion):
    rep = stpetersburg_analysis(64)
    convergent = stpetersburg_analysis(30, payoff=lambda m: 1.5**m)
    ok = (
        rep.divergent
        and rep.n_opt is not None
        and 0.5 < rep.n_opt < 1.5
        and rep.beta_estimate is not None
        and rep.beta_estimate < 0
        and not convergent.divergent
        and convergent.beta_estimate is None
    )
    scenario = reports()["st_petersburg"]
    criterion(6, ok and scenario.passed,
              f"divergent={rep.divergent} n_opt={rep.n_opt:.4f} beta={rep.beta_estimate:.4f}")
    assert ok and scenario.passed


def test_criterion_7_network_figures(criterion):
    t0 = time.perf_counter()
    tr = {k: simulate_discrete(parse_network_file(f"fig{k}").groups, 2000) for k in range(1, 7)}
    reg = {k: classify_regime(t) for k, t in tr.items()}
    cont = {k: simulate_continuous(parse_network_file(f"fig{k}").groups, 100, sample_every=0.25)
            for k in (9, 11, 14)}
    elapsed = time.perf_counter() - t0
    att = {k: run_network(parse_network_file(f"fig{k}")) for k in (7, 8)}

    def near(a, b):
        return max(abs(x - y) for x, y in zip(a, b)) <= 0.005

    results = {
        "fig1 p": near(tr[1].final, (0.778, 0.362)),
        "fig2 p": near(tr[2].final, (0.730, 0.695)),
        "fig1 fixed": reg[1].groups == (FIXED_POINT, FIXED_POINT),
        "fig2 fixed": reg[2].groups == (FIXED_POINT, FIXED_POINT),
        "fig3 mixed": sorted(reg[3].groups) == sorted((FIXED_POINT, PERIODIC)) and reg[3].mixed,
        "fig4 periodic": reg[4].groups == (PERIODIC, PERIODIC),
        "fig5 mixed chaotic": reg[5].overall == CHAOTIC and reg[5].mixed,
        "fig6 chaotic": reg[6].groups == (CHAOTIC, CHAOTIC),
        "fig9 p": near(cont[9].final, (0.778, 0.362)),
        "fig11 p": near(cont[11].final, (0.265, 0.566)),
        "fig14 p": near(cont[14].final, (0.99, 0.99)),
        "fig7/8 p": all(near(a.trajectory.final, (0.64, 0.64)) for a in att.values()),
        "fig7/8 q": all(near(a.trajectory.q[-1], (0.0, 0.0)) for a in att.values()),
        "fig7/8 fixed": all(a.regime.overall == FIXED_POINT for a in att.values()),
        "runtime": elapsed < 10,
    }
    bad = [k for k, v in results.items() if not v]
    criterion(7, not bad, f"{len(results) - len(bad)}/{len(results)} checks, T=2000 runs {elapsed:.2f} s"
              + (f"; failing {bad}" if bad else ""))
    assert not bad


@pytest.mark.slow
def test_criterion_8_fixed_point_solver(criterion):
    # horizons long enough for the slow tails: fig2 is 2e-4 off at T=2000, fig8 still 1.4e-3 at T=3e5
    discrete = {1: 2000, 2: 10_000, 7: 1_000_000, 8: 1_000_000}
    branch = {13: "consensus", 14: "consensus"}
    errs = {}
    for k, T in discrete.items():
        g = parse_network_file(f"fig{k}").groups
        fp = fixed_point_solve(g)
        errs[k] = max(abs(a - b) for a, b in zip(fp.p, simulate_discrete(g, T).final)) if fp.converged else math.inf
    for k in range(9, 15):
        cfg = parse_network_file(f"fig{k}")
        fp = fixed_point_solve(cfg.groups, branch=branch.get(k, "divergent"))
        final = run_network(cfg).trajectory.final
        errs[k] = max(abs(a - b) for a, b in zip(fp.p, final)) if fp.converged else math.inf
    fp1 = fixed_point_solve(parse_network_file("fig1").groups)
    kl = kl_gain(0.362, 0.778)
    ok = max(errs.values()) <= 1e-3 and abs(fp1.q[1] + 0.54) <= 0.005 and abs(kl - 0.397) <= 5e-4
    criterion(8, ok, f"{len(errs)} figures, worst |p* - p(T)| {max(errs.values()):.1e}; "
              f"fig1 q2*={fp1.q[1]:.4f}; KL(0.362,0.778)={kl:.4f}")
    assert ok, errs


def test_criterion_9_qmeasure(criterion):
    t0 = time.perf_counter()
    rep = verify_suite(seed=20240601)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and elapsed < 5 and {r.name for r in rep.results} == {p[0] for p in PROPERTIES} \
        and all(r.instances == 100 for r in rep.results) and len(rep.results) == 9
    failed = [r.name for r in rep.results if not r.passed]
    criterion(9, ok, f"{len(rep.results)} properties x 100 instances, {elapsed:.2f} s"
              + (f"; failing {failed}" if failed else ""))
    assert ok


def test_criterion_10_determinism(criterion, tmp_path, capsys):
    commands = {
        "paradox.json": ["paradox", "run", "--all"],
        "paradox.csv": ["paradox", "run", "--all", "--format", "csv"],
        "qmeasure.json": ["qmeasure", "verify", "--seed", "7", "--instances", "25"],
        "quarter.csv": ["quarter-law", "--format", "csv"],
        "decide.json": ["decide", "--utilities", "3", "1", "2", "--beta", "0.5", "--order", "2", "0", "1"],
        "fig6.csv": ["network", "simulate", "--config", "fig6"],
        "fig11.csv": ["network", "simulate", "--config", "fig11"],
    }
    differ = []
    for name, argv in commands.items():
        blobs = []
        for rep in (1, 2):
            out = tmp_path / str(rep) / name
            out.parent.mkdir(exist_ok=True)
            main(argv + ["-o", str(out)])
            files = [out] + ([out.with_suffix(".summary.json")] if argv[0] == "network" else [])
            blobs.append([f.read_bytes() for f in files])
        if blobs[0] != blobs[1]:
            differ.append(name)
    capsys.readouterr()
    criterion(10, not differ, f"{len(commands)} commands run twice, outputs byte-identical"
              if not differ else f"differing outputs: {differ}")
    assert not differ
