"""
cli.py — Command-line front end for vpn-verify.

    python cli.py validate MODEL
    python cli.py explore MODEL [--max-configs N --max-depth N --dedup global|path] [--out ct.json|ct.dot]
    python cli.py analyze MODEL --property connectivity|soundness|validity|all [--report json|text] [--record]
    python cli.py compose A.vpn B.vpn ... --out fused.vpn
    python cli.py merge A.vpn B.vpn --spec merge.json --out merged.vpn

Exit codes:
    0  command succeeded / every requested property holds
    1  a property fails, the model has violations, or composition conflicts
    2  usage or parse error
    3  exploration was truncated by its bounds; verdicts are inconclusive
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import config
import database
from analysis import PROPERTIES, full_report
from composition import (
    AsyncMergeSpec,
    ComponentNet,
    SharedPlaceSpec,
    SyncMergeSpec,
    compose_mcn,
    merge_async,
    merge_shared_virtual,
    merge_sync,
    restrict,
)
from errors import InvalidNet, ModelError, VpnError
from model_format import (
    ModelDocument,
    document_from_mcn,
    document_from_net,
    load_model,
    parse_guard,
    serialize_model,
)
from net import validate_net
from output import FORMATS, export_graph
from statespace import ExplorationBounds, build_ct, ct_to_cg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_TRUNCATED = 3


def _setup_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, config.LOG_LEVEL, logging.INFO)
    logging.basicConfig(
        level=level,
        format=config.LOG_FORMAT,
        datefmt=config.LOG_DATE_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def _banner(command: str, args: argparse.Namespace, bounds: Optional[ExplorationBounds] = None) -> None:
    logger.info("=" * 60)
    logger.info(" vpn-verify %s", command)
    for model in getattr(args, "models", None) or [getattr(args, "model", None)]:
        if model:
            logger.info(" Model:    %s", model)
    if bounds is not None:
        logger.info(" Bounds:   %d configs, depth %d, %s dedup, %d worker(s)",
                    bounds.max_configs, bounds.max_depth, bounds.dedup_mode, bounds.workers)
    if getattr(args, "property", None):
        logger.info(" Property: %s", args.property)
    logger.info("=" * 60)


# ────────────────────────────────────────────────────────────
#  Startup validation
# ────────────────────────────────────────────────────────────

def _validate_startup(args: argparse.Namespace) -> tuple[list[str], Optional[ExplorationBounds]]:
    """Collect every problem with the arguments before doing any work."""
    errors = []
    models = list(getattr(args, "models", None) or []) + ([args.model] if getattr(args, "model", None) else [])
    for m in models:
        if not Path(m).is_file():
            errors.append(f"model file not found: {m}")

    spec = getattr(args, "spec", None)
    if spec and not Path(spec).is_file():
        errors.append(f"merge spec not found: {spec}")

    out = getattr(args, "out", None)
    if out and args.command == "explore":
        suffix = Path(out).suffix.lstrip(".").lower()
        if suffix not in FORMATS:
            errors.append(f"--out must end in one of {', '.join('.' + f for f in FORMATS)}, got {out!r}")

    bounds = None
    if hasattr(args, "max_configs"):
        try:
            bounds = ExplorationBounds(
                max_configs=args.max_configs,
                max_depth=args.max_depth,
                dedup_mode=args.dedup,
                workers=args.workers,
            )
        except ValueError as exc:
            errors.append(str(exc))
    return errors, bounds


def _load(path: str) -> ModelDocument:
    return load_model(path)


def _report_diagnostics(exc: ModelError) -> None:
    for diag in exc.diagnostics:
        logger.error("%s", diag)


# ────────────────────────────────────────────────────────────
#  Subcommands
# ────────────────────────────────────────────────────────────

def cmd_validate(args: argparse.Namespace) -> int:
    doc = _load(args.model)
    violations = validate_net(doc.net)
    for v in violations:
        print(f"{args.model}: [{v.rule}] {v.subject}: {v.message}")
    if violations:
        logger.warning("%d violation(s) in %s", len(violations), args.model)
        return EXIT_FAIL
    mcn = doc.to_mcn()
    print(
        f"{args.model}: ok, {len(doc.net.places)} place(s), {len(doc.net.transitions)} transition(s), "
        f"{len(mcn.components)} component(s), {len(mcn.interactions)} interaction net(s)"
    )
    return EXIT_OK


def cmd_explore(args: argparse.Namespace, bounds: ExplorationBounds) -> int:
    doc = _load(args.model)
    ct = build_ct(doc.net, bounds)
    stats = ct.stats()
    print(
        f"{stats['nodes']} configuration(s), {stats['edges']} firing(s), depth {stats['depth']}, "
        f"{stats['complete_paths']} complete path(s)" + (" [TRUNCATED]" if ct.truncated else "")
    )
    if args.out:
        graph = ct_to_cg(ct) if args.graph else ct
        fmt = Path(args.out).suffix.lstrip(".").lower()
        Path(args.out).write_bytes(export_graph(graph, fmt))
        logger.info("Wrote %s", args.out)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, bounds: ExplorationBounds) -> int:
    doc = _load(args.model)
    if args.final_mode:
        doc.final_mode = args.final_mode
    mcn = doc.to_mcn()
    props = PROPERTIES if args.property == "all" else (args.property,)
    report = full_report(mcn, bounds, props)
    code = report.exit_code()

    if args.report == "json":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    else:
        text = report.format_text()
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        logger.info("Wrote report to %s", args.out)
    else:
        print(text)

    if args.record or config.HISTORY_ENABLED:
        try:
            database.migrate()
            database.record_run(
                args.model,
                report.to_dict(),
                properties=list(props),
                max_configs=bounds.max_configs,
                max_depth=bounds.max_depth,
                dedup_mode=bounds.dedup_mode,
                exit_code=code,
            )
        except Exception as exc:
            logger.error("Could not record run: %s", exc, exc_info=True)
    return code


def _components_of(doc: ModelDocument, default_name: str):
    if doc.components:
        mcn = doc.to_mcn()
        return list(mcn.components), list(mcn.interactions)
    finals = frozenset(p for ps in doc.finals.values() for p in ps)
    net = restrict(doc.net, doc.net.places, doc.net.transitions)
    return [ComponentNet(default_name, net, finals)], []


def cmd_compose(args: argparse.Namespace) -> int:
    cns, isns = [], []
    mode = None
    for path in args.models:
        doc = _load(path)
        mode = mode or doc.final_mode
        parts = _components_of(doc, Path(path).stem)
        cns += parts[0]
        isns += parts[1]
    mcn = compose_mcn(cns, isns, mode)
    Path(args.out).write_text(serialize_model(document_from_mcn(mcn)), encoding="utf-8")
    print(f"composed {len(cns)} component(s), {len(isns)} interaction net(s) into {args.out}")
    return EXIT_OK


def _merge_spec(raw: dict, variables, constants):
    mode = raw.get("mode")
    if mode == "async":
        return AsyncMergeSpec(
            t1=raw["t1"], t2=raw["t2"], s1=raw["s1"], s2=raw["s2"], bridge=raw["bridge"],
            expr=tuple(tuple(tok) for tok in raw.get("expr", [["eps"]])),
            guard1=parse_guard(raw.get("guard1", "true"), variables, constants),
            guard2=parse_guard(raw.get("guard2", "true"), variables, constants),
        )
    if mode == "sync":
        return SyncMergeSpec(transition=raw["transition"])
    if mode == "shared":
        return SharedPlaceSpec(place=raw["place"], t1=raw["t1"], t2=raw["t2"], t3=raw["t3"], t4=raw["t4"])
    raise ValueError(f"merge spec mode must be 'async', 'sync' or 'shared', got {mode!r}")


def cmd_merge(args: argparse.Namespace) -> int:
    left, right = _load(args.models[0]), _load(args.models[1])
    try:
        raw = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        variables = left.net.variables | right.net.variables
        constants = set(left.net.universe()) | set(right.net.universe())
        spec = _merge_spec(raw, variables, constants - variables)
    except (ValueError, KeyError, TypeError) as exc:
        logger.error("Bad merge spec %s: %s", args.spec, exc)
        return EXIT_USAGE

    if isinstance(spec, AsyncMergeSpec):
        net = merge_async(left.net, right.net, spec)
    elif isinstance(spec, SyncMergeSpec):
        net = merge_sync(left.net, right.net, spec)
    else:
        net = merge_shared_virtual(left.net, right.net, spec)

    finals = {**left.finals, **right.finals}
    Path(args.out).write_text(serialize_model(document_from_net(net, finals, left.final_mode)), encoding="utf-8")
    print(f"merged {args.models[0]} and {args.models[1]} into {args.out}")
    return EXIT_OK


# ────────────────────────────────────────────────────────────
#  Entry point
# ────────────────────────────────────────────────────────────

def _add_bounds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-configs", type=int, default=config.MAX_CONFIGS)
    p.add_argument("--max-depth", type=int, default=config.MAX_DEPTH)
    p.add_argument("--dedup", choices=("global", "path"), default=config.DEDUP_MODE)
    p.add_argument("--workers", type=int, default=config.EXPLORE_WORKERS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vpn-verify", description="Variable Petri net verifier")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a model and check its well-formedness")
    p.add_argument("model")

    p = sub.add_parser("explore", help="build the configuration tree")
    p.add_argument("model")
    _add_bounds(p)
    p.add_argument("--out", help="write the tree as .json or .dot")
    p.add_argument("--graph", action="store_true", help="export the configuration graph instead of the tree")

    p = sub.add_parser("analyze", help="check connectivity, soundness and validity")
    p.add_argument("model")
    p.add_argument("--property", choices=PROPERTIES + ("all",), default="all")
    p.add_argument("--report", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--final-mode", choices=("simultaneous", "independent"))
    p.add_argument("--record", action="store_true", help="store the report in the run history")
    _add_bounds(p)

    p = sub.add_parser("compose", help="fuse models component-wise")
    p.add_argument("models", nargs="+")
    p.add_argument("--out", required=True)

    p = sub.add_parser("merge", help="merge two models with a merge operator")
    p.add_argument("models", nargs=2)
    p.add_argument("--spec", required=True, help="JSON merge spec")
    p.add_argument("--out", required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    _setup_logging(args.verbose)
    errors, bounds = _validate_startup(args)
    _banner(args.command, args, bounds)
    if errors:
        for err in errors:
            logger.error("Config error: %s", err)
        return EXIT_USAGE

    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "explore":
            return cmd_explore(args, bounds)
        if args.command == "analyze":
            return cmd_analyze(args, bounds)
        if args.command == "compose":
            return cmd_compose(args)
        return cmd_merge(args)
    except ModelError as exc:
        _report_diagnostics(exc)
        return EXIT_USAGE
    except InvalidNet as exc:
        logger.error("Invalid net: %s", exc)
        for v in exc.violations:
            logger.error("  [%s] %s: %s", v.rule, v.subject, v.message)
        return EXIT_FAIL
    except VpnError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
