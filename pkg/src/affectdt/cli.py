"""Command-line entry point: ``affectdt <command> ...``."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .io import InputError, RunConfig, run


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", "-o", help="write results to this file")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output file format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="affectdt", description="Affective decision toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    par = sub.add_parser("paradox", help="behavioral paradox fixtures")
    psub = par.add_subparsers(dest="action", required=True)
    prun = psub.add_parser("run", help="run scenarios and compare with stored values")
    prun.add_argument("names", nargs="*", help="scenario ids from the catalog")
    prun.add_argument("--all", action="store_true", help="run the whole catalog")
    prun.add_argument("--file", action="append", default=[], help="scenario file to run instead of the catalog")
    prun.add_argument("--fixtures", help="scenario directory (overrides the packaged catalog)")
    prun.add_argument("--beta", type=float, help="override the belief parameter")
    prun.add_argument("--base", type=float, help="override the quality base")
    _common(prun)

    net = sub.add_parser("network", help="interacting agent groups")
    nsub = net.add_subparsers(dest="action", required=True)
    nsim = nsub.add_parser("simulate", help="simulate one config and classify its regime")
    nsim.add_argument("--config", required=True, help="config file or shipped name such as fig4")
    nsim.add_argument("--T", type=float, help="override the horizon")
    nsim.add_argument("--h", type=float, help="override the continuous step")
    nsim.add_argument("--threshold", action="append", default=[], metavar="NAME=VALUE",
                      help="override a regime threshold")
    nsim.add_argument("--output", "-o", help="trajectory CSV path (summary JSON goes alongside)")

    qm = sub.add_parser("qmeasure", help="measurement identities")
    qsub = qm.add_subparsers(dest="action", required=True)
    qver = qsub.add_parser("verify", help="seeded property suite")
    qver.add_argument("--seed", type=int, default=0)
    qver.add_argument("--instances", type=int, default=100)
    _common(qver)

    ql = sub.add_parser("quarter-law", help="mean |q| of the stored experimental tables")
    ql.add_argument("--tables", help="tables file (default: packaged)")
    _common(ql)

    dec = sub.add_parser("decide", help="behavioral probabilities for given utilities")
    dec.add_argument("--utilities", type=float, nargs="+", required=True)
    dec.add_argument("--beta", type=float, default=0.0)
    dec.add_argument("--order", type=int, nargs="+", help="alternative indices, most attractive first")
    dec.add_argument("--labels", nargs="+")
    _common(dec)
    return ap


def _thresholds(items: Sequence[str]) -> dict[str, float | int]:
    out: dict[str, float | int] = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"threshold {item!r} is not NAME=VALUE")
        out[name] = int(value) if name in ("max_period", "min_length") else float(value)
    return out


def config_from_args(a: argparse.Namespace) -> RunConfig:
    if a.command == "paradox":
        if not (a.all or a.names or a.file):
            raise InputError("name scenarios, pass --file, or use --all")
        return RunConfig(
            "paradox", tuple(a.file), a.output, a.format, beta=a.beta, base=a.base,
            options={"names": tuple(a.names), "fixtures": a.fixtures},
        )
    if a.command == "network":
        return RunConfig("network", (a.config,), a.output, "csv", T=a.T, h=a.h, thresholds=_thresholds(a.threshold))
    if a.command == "qmeasure":
        return RunConfig("qmeasure", (), a.output, a.format, seed=a.seed, options={"instances": a.instances})
    if a.command == "quarter-law":
        return RunConfig("quarter-law", (a.tables,) if a.tables else (), a.output, a.format)
    return RunConfig(
        "decide", (), a.output, a.format, beta=a.beta,
        options={"utilities": a.utilities, "order": a.order, "labels": a.labels},
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
