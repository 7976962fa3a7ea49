"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
JSON reports go to stdout with sorted keys; human summaries go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import capacity, decomposition, oracle, scheme
from .instance import FIXTURES, InstanceError, LcbcInstance, fixture, normalize, parse_instance, signal_spaces

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
COMMANDS = ("solve", "decompose", "scheme", "simulate", "oracle", "examples")


@dataclass(frozen=True)
class RunConfig:
    command: str
    path: str | None = None
    seed: int = 0
    trials: int = 1000
    cap: int = oracle.DEFAULT_CAP
    node_budget: int = oracle.DEFAULT_NODE_BUDGET
    json_only: bool = False
    emit: str | None = None


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which is reserved for verification failures
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lcbc3", description="Exact capacity and optimal schemes for 3-user linear computation broadcast.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_, path=True, path_help="instance JSON file"):
        sp = sub.add_parser(name, help=help_)
        if path:
            sp.add_argument("path", help=path_help)
        sp.add_argument("--json", dest="json_only", action="store_true", help="suppress the text summary")
        sp.add_argument("--seed", type=_nonneg, default=0)
        sp.add_argument("--emit", default=None, help="also write the full report to this path")
        return sp

    add("solve", "capacity report")
    add("decompose", "ten-basis decomposition and property checks")
    add("scheme", "build an optimal broadcast scheme")
    sp = add("simulate", "build a scheme and verify it end to end")
    sp.add_argument("--trials", type=_nonneg, default=1000)
    sp.add_argument("--cap", type=_nonneg, default=oracle.DEFAULT_CAP)
    sp = add("oracle", "one-shot brute-force cost via the confusability graph")
    sp.add_argument("--cap", type=_nonneg, default=oracle.DEFAULT_CAP)
    sp.add_argument("--node-budget", dest="node_budget", type=_nonneg, default=oracle.DEFAULT_NODE_BUDGET)
    sp = add("examples", "write the bundled fixtures", path=False)
    sp.add_argument("path", nargs="?", default="fixtures", help="output directory (default: fixtures)")
    return p


def parse_config(argv) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError(parser.format_usage() + "lcbc3: error: a subcommand is required")
    return RunConfig(
        command=ns.command,
        path=ns.path,
        seed=ns.seed,
        trials=getattr(ns, "trials", 1000),
        cap=getattr(ns, "cap", oracle.DEFAULT_CAP),
        node_budget=getattr(ns, "node_budget", oracle.DEFAULT_NODE_BUDGET),
        json_only=ns.json_only,
        emit=ns.emit,
    )


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def load(path: str) -> LcbcInstance:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_instance(data)
    except InstanceError as exc:
        raise UsageError(f"{path}: {exc}") from None


# --- commands ----------------------------------------------------------------------


def cmd_solve(cfg: RunConfig, say):
    rep = capacity.solve(load(cfg.path))
    a = rep.allocation
    say(f"Delta* = {rep.delta_star}  C* = {rep.capacity}  F* = {rep.F_star}")
    say(f"lambda: l123={a.l123} l12={a.l12} l13={a.l13} l23={a.l23} l={a.l}")
    return rep.to_json(), rep.agree


def cmd_decompose(cfg: RunConfig, say):
    fam = signal_spaces(normalize(load(cfg.path)))
    bases = decomposition.decompose(fam)
    props = decomposition.verify_properties(bases)
    acct = decomposition.accounting_holds(bases)
    for name, size in bases.sizes.items():
        say(f"{name:>8}: {size} column(s)")
    say("properties: all hold" if props.ok else f"properties failed: {props.failed()}")
    out = {
        "bases": bases.to_json(),
        "sizes": bases.sizes,
        "properties": {f"P{i}": ok for i, ok in enumerate(props.results, 1)},
        "accounting": acct,
    }
    return out, props.ok and acct


def cmd_scheme(cfg: RunConfig, say):
    sch = scheme.build_scheme(load(cfg.path), seed=cfg.seed)
    say(f"L'={sch.L_prime} z={sch.z} (planner z={sch.planner_z}) L={sch.L} cols(G)={sch.G.cols} cost={sch.cost}")
    return sch.to_json(), 0 not in sch.dets


def cmd_simulate(cfg: RunConfig, say):
    inst = load(cfg.path)
    sch = scheme.build_scheme(inst, seed=cfg.seed)
    rep = scheme.verify_scheme(sch, trials=cfg.trials, seed=cfg.seed, cap=cfg.cap)
    mode = "exhaustive" if rep.exhaustive else "random"
    say(f"determinants nonzero: {rep.dets_nonzero}")
    say(f"cost {rep.cost} vs F* {rep.F_star}: {'match' if rep.cost_matches else 'MISMATCH'}")
    say(f"decoding ({mode}, {rep.trials} realizations): {rep.failures} failure(s)")
    out = rep.to_json()
    out.update({"L_prime": sch.L_prime, "z": sch.z, "L": sch.L, "seed": cfg.seed})
    return out, rep.ok


def cmd_oracle(cfg: RunConfig, say):
    inst = load(cfg.path)
    rep = capacity.solve(inst)
    try:
        g = oracle.build_confusability(inst, cfg.cap)
    except oracle.OracleCapExceeded as exc:
        raise UsageError(str(exc)) from None
    res, cost = oracle.scalar_optimal_cost(g, cfg.node_budget)
    consistent = cost.q**rep.delta_star.numerator <= cost.chi_upper**rep.delta_star.denominator
    say(f"vertices={g.n} edges={g.edge_count} chi={res.chi if res.exact else f'in [{res.lower}, {res.upper}]'}")
    say(f"one-shot cost {cost.describe()} vs Delta* {rep.delta_star}")
    out = cost.to_json()
    out.update(
        {
            "vertices": g.n,
            "edges": g.edge_count,
            "delta_star": capacity.fmt(rep.delta_star),
            "separation": cost.strictly_above(rep.delta_star),
            "consistent": consistent,
        }
    )
    return out, consistent


def cmd_examples(cfg: RunConfig, say):
    out_dir = Path(cfg.path)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name in FIXTURES:
            target = out_dir / f"{name}.json"
            target.write_text(fixture(name).dumps() + "\n")
            written.append(str(target))
    except OSError as exc:
        raise UsageError(f"cannot write to {out_dir}: {exc.strerror}") from None
    say(f"wrote {len(written)} fixtures to {out_dir}")
    return {"written": written}, True


HANDLERS = {
    "solve": cmd_solve,
    "decompose": cmd_decompose,
    "scheme": cmd_scheme,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "examples": cmd_examples,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_USAGE

    def say(line: str) -> None:
        if not cfg.json_only:
            print(line, file=stderr)

    try:
        payload, ok = HANDLERS[cfg.command](cfg, say)
    except UsageError as exc:
        print(f"lcbc3 {cfg.command}: {exc}", file=stderr)
        return EXIT_USAGE
    except scheme.SchemeError as exc:
        print(f"lcbc3 {cfg.command}: {exc}", file=stderr)
        return EXIT_VERIFY
    text = dumps(payload)
    if cfg.emit and cfg.command != "examples":
        try:
            Path(cfg.emit).write_text(text + "\n")
        except OSError as exc:
            print(f"lcbc3: cannot write {cfg.emit}: {exc.strerror}", file=stderr)
            return EXIT_USAGE
    print(text, file=stdout)
    return EXIT_OK if ok else EXIT_VERIFY


def main() -> None:
    sys.exit(run(sys.argv[1:]))
