"""
Command-line entry point: ``freesum <subcommand> [options]``.

Exit status is 0 when every check in the report passes, 1 when any check
fails, and 2 on a configuration error (unreadable or invalid input files,
unknown families or laws, problems too large for the configured caps).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from .errors import CapacityError, SizeLimitError
from .harness import (
    ExperimentReport,
    parse_laws,
    run_clt_sweep,
    run_counterexample_suite,
    run_hyper_suite,
    run_invariance_sweep,
    run_rmt_validation,
)
from .homsum import CoefficientTensor, qn_moment, resolve_assignment
from .wigner_calc import fourth_moment_report

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _load_json(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(obj, (dict, list)):
        raise ConfigError(f"{path} must hold a JSON object")
    return obj


def _analyze(args) -> ExperimentReport:
    f = CoefficientTensor.from_json(_load_json(args.tensor))
    pred = f.predicates()
    free = f.influence_profile("free")
    classical = f.influence_profile("classical")
    rep = ExperimentReport("analyze", {"tensor": args.tensor, "N": f.N, "d": f.d, "support": len(f)})
    rep.config["predicates"] = pred.as_dict()
    rep.config["tau_free"] = free.tau
    rep.config["tau_classical"] = classical.tau
    for i in range(1, f.N + 1):
        rep.rows.append({"i": i, "influence_free": free.per_index[i - 1], "influence_classical": classical.per_index[i - 1]})
    if pred.mirror_symmetric and pred.vanishes_on_diagonals and f.entries:
        fm = fourth_moment_report(f)
        rep.config["fourth_moment"] = fm.as_dict()
        if fm.top_contraction_norm is not None:
            rep.check("influence_inequality", fm.slack, -1e-12, ">=", note="top contraction norm minus first-slot influence")
    else:
        rep.notes.append("fourth-moment diagnostics need a mirror-symmetric tensor vanishing on diagonals")
    return rep


def _moments(args) -> ExperimentReport:
    f = CoefficientTensor.from_json(_load_json(args.tensor))
    if args.laws is None:
        raise ConfigError("moments needs --laws")
    laws = resolve_assignment(parse_laws(_load_json(args.laws)), f.N)
    if args.m < 1:
        raise ConfigError("-m must be >= 1")
    value = qn_moment(f, laws, args.m)
    rep = ExperimentReport("moments", {"tensor": args.tensor, "laws": args.laws, "m": args.m})
    rep.rows.append({"m": args.m, "value": value})
    return rep


def _sweep(runner, takes_threads: bool = False):
    def run(args) -> ExperimentReport:
        spec = dict(_load_json(args.spec))
        if args.seed is not None:
            spec["seed"] = args.seed
            if "mc" in spec:
                spec["mc"] = {**spec["mc"], "seed": args.seed}
        if takes_threads:
            return runner(spec, threads=args.threads)
        return runner(spec)

    return run


COMMANDS = {
    "analyze": _analyze,
    "moments": _moments,
    "clt": _sweep(run_clt_sweep),
    "invariance": _sweep(run_invariance_sweep),
    "counterexamples": _sweep(run_counterexample_suite),
    "hyper": _sweep(run_hyper_suite),
    "rmt": _sweep(run_rmt_validation, takes_threads=True),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="experiment spec JSON (defaults apply when omitted)")
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, help="overrides the seed of the spec")
    common.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo draws")

    parser = argparse.ArgumentParser(prog="freesum", description="Exact free moments of homogeneous sums.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", parents=[common], help="predicates, influences and contraction norms of a tensor")
    p.add_argument("tensor")
    p = sub.add_parser("moments", parents=[common], help="phi(Q^m) for a tensor and a law assignment")
    p.add_argument("tensor")
    p.add_argument("--laws", help="law assignment JSON")
    p.add_argument("-m", type=int, required=True)
    sub.add_parser("clt", parents=[common], help="moments of Q_N along an N grid")
    sub.add_parser("invariance", parents=[common], help="moment gaps against tau^(1/2), with telescoping")
    sub.add_parser("counterexamples", parents=[common], help="tetilla, Rademacher star and mirror families")
    sub.add_parser("hyper", parents=[common], help="randomized hypercontractivity ratios")
    sub.add_parser("rmt", parents=[common], help="random-matrix Monte Carlo against exact moments")
    return parser


def _write(rep: ExperimentReport, fmt: str, out: str | None):
    if fmt == "json":
        text = rep.to_json()
        if out:
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
        return
    rows, checks = rep.to_csv()
    if out:
        path = Path(out)
        path.write_text(rows)
        path.with_name(path.stem + ".checks.csv").write_text(checks)
    else:
        sys.stdout.write(rows + "\n" + checks)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rep = COMMANDS[args.command](args)
    except (ConfigError, SizeLimitError, CapacityError, ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    _write(rep, args.format, args.out)
    failed = [c for c in rep.checks if not c.passed]
    for c in failed:
        where = f" at N={c.N}" if c.N is not None else ""
        print(f"FAIL {c.name}{where}: {c.value} {c.relation} {c.bound} {c.note}".rstrip(), file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
