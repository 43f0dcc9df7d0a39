"""Command-line interface: ``coopnet <command> ...``.

Graph sources are an edge-list path (``--input``), a family spec such as
``star_of_cliques:m=4,n=10`` (``--family``) or a random model string such as
``er:n=40,p=0.3,seed=7`` (``--model``). Artifact-producing commands write a
JSON run manifest next to ``--out`` (or to ``--manifest``).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .coalescence import NEVER, PROMOTER, SPITE, bstar
from .conjoin import attach_leaves, conjoin, connect_groups, gate_sweep
from .families import SCHEMA, FamilySpec, generate
from .graph import Graph, from_edge_list, metadata_json, to_edge_list
from .random_graphs import generate_model, parse_model
from .simulate import (DEFAULT_FACTORS, SimulationConfig, crossover_scan,
                       estimate_fixation, results_csv)
from . import verify

EXIT_CODES = {PROMOTER: 0, SPITE: 1, NEVER: 2}
EXIT_ERROR = 3
RANDOM_MODELS = ("er", "pa", "sbm")


class CliError(Exception):
    pass


def _g12(x):
    """Round floats to 12 significant digits for printing; recurse into containers."""
    if isinstance(x, float):
        return x if not math.isfinite(x) else float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _g12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_g12(v) for v in x]
    return x


def _dumps(obj) -> str:
    return json.dumps(_g12(obj), indent=2)


class _Run:
    """Collects inputs and outputs of one command for its manifest."""

    def __init__(self, args: argparse.Namespace, argv: list[str]):
        self.args = args
        self.argv = argv
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.seed: int | None = getattr(args, "seed", None)

    def graph(self, source: str, kind: str) -> Graph:
        if kind == "input":
            try:
                data = Path(source).read_bytes()
            except OSError as exc:
                raise CliError(f"cannot read {source}: {exc.strerror}") from None
            self.inputs[source] = hashlib.sha256(data).hexdigest()
            return from_edge_list(data.decode())
        if kind == "family":
            return generate(FamilySpec.parse(source))
        model, params = parse_model(source)
        if model not in RANDOM_MODELS:
            raise CliError(f"unknown model {model!r}; known: {', '.join(RANDOM_MODELS)}")
        if "seed" not in params:
            if self.seed is None:
                raise CliError(f"random model {source!r} needs a seed (in the string or --seed)")
            source = f"{source},seed={self.seed}"
        elif self.seed is not None and int(params["seed"]) != self.seed:
            raise CliError("--seed disagrees with the seed in the model string")
        else:
            self.seed = int(params["seed"])
        return generate_model(source)

    def emit(self, text: str) -> None:
        out = self.args.out
        if out:
            Path(out).write_text(text)
            self.outputs.append(out)
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")

    def manifest(self) -> None:
        path = getattr(self.args, "manifest", None) or (
            f"{self.args.out}.manifest.json" if self.args.out else None)
        if path is None:
            return
        params = {k: v for k, v in vars(self.args).items() if k not in ("func", "manifest")}
        record = {
            "command": self.args.command,
            "argv": self.argv,
            "parameters": params,
            "seed": self.seed,
            "version": __version__,
            "input_digests": self.inputs,
            "outputs": self.outputs,
        }
        Path(path).write_text(_dumps(record) + "\n")


def _graph_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--input", metavar="PATH", help="edge-list file")
    g.add_argument("--family", metavar="SPEC", help="family spec, e.g. star:n=10")
    g.add_argument("--model", metavar="SPEC", help="random model, e.g. er:n=40,p=0.3,seed=7")


def _source_of(args, prefix: str = "") -> tuple[str, str]:
    for kind in ("input", "family", "model"):
        v = getattr(args, prefix + kind, None)
        if v:
            return v, kind
    raise CliError("no graph source given")


def _out_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    p.add_argument("--manifest", metavar="PATH",
                   help="run manifest path (default <out>.manifest.json)")


# ---------------------------------------------------------------------------
# commands


def cmd_bstar(args, run: _Run) -> int:
    g = run.graph(*_source_of(args))
    report = bstar(g, args.updating, args.method)
    d = report.to_dict()
    if args.format == "json":
        run.emit(_dumps(d) + "\n")
    else:
        keys = list(d)
        vals = ["" if d[k] is None else (f"{d[k]:.12g}" if isinstance(d[k], float) else str(d[k]))
                for k in keys]
        run.emit(",".join(keys) + "\n" + ",".join(vals) + "\n")
    run.manifest()
    return EXIT_CODES[report.classification]


def cmd_verify_families(args, run: _Run) -> int:
    sections = [("fixtures", verify.run_fixtures()), ("clique law", verify.clique_law())]
    if not args.skip_grid:
        sections.append(("closed-form grid",
                         verify.closed_form_grid(lo=args.grid_min, hi=args.grid_max)))
    failed = 0
    chunks = []
    for title, rows in sections:
        bad = sum(not r.passed for r in rows)
        failed += bad
        chunks.append(f"== {title}: {len(rows) - bad}/{len(rows)} pass\n{verify.format_rows(rows)}")
    run.emit("\n".join(chunks) + "\n")
    run.manifest()
    return 1 if failed else 0


def cmd_sweep(args, run: _Run) -> int:
    g1 = run.graph(*_source_of(args, "g1_"))
    g2 = run.graph(*_source_of(args, "g2_"))
    summary = gate_sweep(g1, g2, args.brokers, args.method)
    run.emit(summary.to_json() + "\n" if args.format == "json" else summary.to_csv())
    run.manifest()
    return 0


def cmd_simulate(args, run: _Run) -> int:
    g = run.graph(*_source_of(args))
    if args.b is not None:
        cfg = SimulationConfig(b=args.b, c=args.c, delta=args.delta, trials=args.trials,
                               seed=args.seed, max_steps=args.max_steps)
        rows = [(cfg, estimate_fixation(g, cfg))]
    else:
        rows = []
        for b, res in crossover_scan(g, args.delta, args.trials, args.seed,
                                     args.factors, args.c, args.max_steps):
            rows.append((SimulationConfig(b=b, c=args.c, delta=args.delta, trials=args.trials,
                                          seed=args.seed, max_steps=args.max_steps), res))
    run.emit(results_csv(rows))
    run.manifest()
    capped = sum(r.capped for _, r in rows)
    if capped:
        print(f"warning: {capped} trials hit the step cap and were excluded", file=sys.stderr)
    return 0


def cmd_generate(args, run: _Run) -> int:
    kind = args.spec.partition(":")[0].strip()
    if kind in SCHEMA:
        g = run.graph(args.spec, "family")
    elif kind in RANDOM_MODELS:
        g = run.graph(args.spec, "model")
    else:
        raise CliError(f"unknown family or model {kind!r}")
    run.emit(metadata_json(g) + "\n" if args.format == "json" else to_edge_list(g))
    run.manifest()
    return 0


def cmd_conjoin(args, run: _Run) -> int:
    if args.groups:
        if args.seed is None:
            raise CliError("connect-groups mode needs --seed")
        graphs = [run.graph(s, "input") for s in args.groups]
        g = connect_groups(graphs, args.p_between, args.seed)
    else:
        g1 = run.graph(*_source_of(args, "g1_"))
        g2 = run.graph(*_source_of(args, "g2_"))
        g = conjoin(g1, g2, args.gate1, args.gate2, args.brokers)
    for spec in args.leaves or ():
        node, _, m = spec.partition(":")
        try:
            g = attach_leaves(g, int(node), int(m))
        except ValueError as exc:
            raise CliError(f"--leaves {spec!r}: {exc}") from None
    run.emit(to_edge_list(g))
    run.manifest()
    return 0


# ---------------------------------------------------------------------------
# parser


def _pair_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    for tag in ("g1", "g2"):
        grp = p.add_mutually_exclusive_group(required=required)
        grp.add_argument(f"--{tag}-input", metavar="PATH")
        grp.add_argument(f"--{tag}-family", metavar="SPEC")
        grp.add_argument(f"--{tag}-model", metavar="SPEC")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bstar", help="critical benefit-to-cost ratio of one graph")
    _graph_source(p)
    p.add_argument("--updating", choices=("db", "im"), default="db")
    p.add_argument("--method", choices=("auto", "direct", "sparse", "iterative", "exact"),
                   default="auto")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, help="seed for --model sources")
    _out_args(p)
    p.set_defaults(func=cmd_bstar)

    p = sub.add_parser("verify-families", help="fixture table and closed-form grid")
    p.add_argument("--skip-grid", action="store_true")
    p.add_argument("--grid-min", type=int, default=2)
    p.add_argument("--grid-max", type=int, default=8)
    _out_args(p)
    p.set_defaults(func=cmd_verify_families)

    p = sub.add_parser("sweep", help="b* over every gate pair of two graphs")
    _pair_source(p)
    p.add_argument("--brokers", type=int, default=0)
    p.add_argument("--method", choices=("auto", "direct", "sparse", "iterative", "exact"),
                   default="auto")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--seed", type=int, help="seed for --*-model sources")
    _out_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo fixation probability")
    _graph_source(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--b", type=float, help="benefit; omit to scan factors of b*")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--factors", type=float, nargs="+", default=list(DEFAULT_FACTORS))
    p.add_argument("--max-steps", type=int, default=100_000_000)
    _out_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("generate", help="write a family or random graph as an edge list")
    p.add_argument("spec", help="family spec or random model string")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("edges", "json"), default="edges",
                   help="edge list or metadata JSON")
    _out_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("conjoin", help="join two graphs, or link several groups at random")
    _pair_source(p, required=False)
    p.add_argument("--gate1", type=int, default=0)
    p.add_argument("--gate2", type=int, default=0)
    p.add_argument("--brokers", type=int, default=0)
    p.add_argument("--leaves", action="append", metavar="NODE:M",
                   help="attach M leaves to NODE of the result (repeatable)")
    p.add_argument("--groups", nargs="+", metavar="PATH",
                   help="edge-list files to link with --p-between")
    p.add_argument("--p-between", type=float, default=0.01)
    p.add_argument("--seed", type=int)
    _out_args(p)
    p.set_defaults(func=cmd_conjoin)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.command == "conjoin" and not args.groups:
        for tag in ("g1", "g2"):
            if not any(getattr(args, f"{tag}_{k}") for k in ("input", "family", "model")):
                parser.error(f"conjoin needs --{tag}-input, --{tag}-family or --{tag}-model")
    run = _Run(args, argv)
    try:
        return args.func(args, run)
    except (CliError, ValueError, RuntimeError, OSError) as exc:
        print(f"coopnet {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
