"""Command-line front door for every pipeline role.

Exit codes are script-friendly: 0 for a clean run, 1 when analysis
found anomalies, 2 for usage or I/O problems.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
from collections import Counter
from pathlib import Path

from .channel import ConnectFailed
from .ingest import TraceError
from .model import GraphError
from .patterns import TemplateInvalid, builtin_simple_exchange, load_template_file
from .pipeline import build_report, load_graph, render_svg
from .report import SchemaViolation, parse_report, serialize_report
from .synth import (
    DropIteration,
    InvalidSpec,
    LengthMismatch,
    SCENARIOS,
    SyntheticSpec,
    WrongDestination,
    generate_synthetic,
)
from .stage import ROLES, StageConfig, StageFailure, run_stage
from .wire import WireError

__all__ = ["main", "parse_fault"]


def parse_fault(text: str):
    """One --fault value: length-mismatch@IT[:PAIR] | wrong-dest@IT[:PROC] | drop@IT."""
    kind, sep, rest = text.partition("@")
    if not sep:
        raise ValueError(f"fault must look like kind@iteration, got {text!r}")
    position, _, extra = rest.partition(":")
    try:
        iteration = int(position)
        argument = int(extra) if extra else 0
    except ValueError:
        raise ValueError(f"fault positions must be integers, got {text!r}") from None
    if kind == "length-mismatch":
        return LengthMismatch(iteration, argument)
    if kind == "wrong-dest":
        return WrongDestination(iteration, argument)
    if kind == "drop":
        if extra:
            raise ValueError("drop@N takes no extra argument")
        return DropIteration(iteration)
    raise ValueError(f"unknown fault kind {kind!r}")


def cmd_generate(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        scenario=args.scenario,
        process_count=args.processes,
        iterations=args.iterations,
        faults=tuple(parse_fault(f) for f in args.fault),
    )
    text = generate_synthetic(spec, args.seed)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _load_templates(directory: str | None):
    templates = [builtin_simple_exchange()]
    if directory:
        paths = sorted(Path(directory).glob("*.json"))
        if not Path(directory).is_dir():
            raise TemplateInvalid(f"{directory} is not a directory")
        templates.extend(load_template_file(str(p)) for p in paths)
    return templates


def cmd_analyze(args: argparse.Namespace) -> int:
    with open(args.trace, encoding="utf-8") as fh:
        graph, relations, pending = load_graph(fh)
    report = build_report(graph, relations, pending, templates=_load_templates(args.templates))
    text = serialize_report(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    counts = Counter(a.kind for a in report.anomalies)
    summary = ", ".join(f"{kind}={n}" for kind, n in sorted(counts.items()))
    print(
        f"events={report.event_count} relations={report.relation_count} "
        f"anomalies={len(report.anomalies)}" + (f" ({summary})" if summary else ""),
        file=sys.stderr,
    )
    return 1 if report.anomalies else 0


def cmd_render(args: argparse.Namespace) -> int:
    with open(args.trace, encoding="utf-8") as fh:
        graph, relations, pending = load_graph(fh)
    if args.report:
        report = parse_report(Path(args.report).read_text(encoding="utf-8"))
    else:
        report = build_report(graph, relations, pending)
    svg = render_svg(graph, report, collapse=args.collapse)
    if args.svg:
        Path(args.svg).write_text(svg, encoding="utf-8")
    else:
        sys.stdout.write(svg)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .sentinel import ControlServer, ModuleRegistry
    from .service import create_app

    registry = ModuleRegistry()
    try:
        control = ControlServer(registry, f"{args.host}:{args.control_port}").start()
    except OSError as exc:
        print(f"error: cannot bind control port: {exc}", file=sys.stderr)
        return 2
    app = create_app(registry, ui_dir=args.ui_dir)
    print(f"control={control.address} http={args.host}:{args.http_port}", flush=True)
    server = uvicorn.Server(
        uvicorn.Config(app, host=args.host, port=args.http_port, log_level="warning")
    )
    try:
        server.run()
    finally:
        control.stop()
    return 0 if server.started else 2


def cmd_stage(args: argparse.Namespace) -> int:
    config = StageConfig(
        role=args.role,
        input=args.in_addr,
        output=args.out,
        sentinel=args.sentinel,
        push_view=args.push_view,
        name=args.name,
    )
    return run_stage(config)


def cmd_pipeline(args: argparse.Namespace) -> int:
    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    stages = doc.get("stages")
    if not isinstance(stages, list) or not stages:
        raise ValueError('pipeline config needs a non-empty "stages" array')
    configs = []
    for i, entry in enumerate(stages):
        if not isinstance(entry, dict):
            raise ValueError(f"stages[{i}] must be an object")
        unknown = set(entry) - {"role", "in", "out", "sentinel", "push_view", "name"}
        if unknown:
            raise ValueError(f"stages[{i}] has unknown keys {sorted(unknown)}")
        configs.append(
            StageConfig(
                role=entry.get("role", ""),
                input=entry.get("in"),
                output=entry.get("out"),
                sentinel=entry.get("sentinel"),
                push_view=entry.get("push_view"),
                name=entry.get("name"),
            )
        )
    failures: list[str] = []

    def run_one(config: StageConfig) -> None:
        try:
            run_stage(config)
        except StageFailure as exc:
            failures.append(f"{config.role}: {exc}")

    threads = [threading.Thread(target=run_one, args=(c,)) for c in configs]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    for failure in failures:
        print(f"error: {failure}", file=sys.stderr)
    return 2 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evgraph", description="event-graph trace analysis pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic trace")
    p.add_argument("--scenario", choices=SCENARIOS, default="simple-exchange-loop")
    p.add_argument("--processes", type=int, default=2)
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--fault", action="append", default=[], metavar="KIND@IT[:ARG]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="trace file (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="analyze a trace, write a JSON report")
    p.add_argument("--trace", required=True)
    p.add_argument("--report", help="report file (default: stdout)")
    p.add_argument("--templates", help="directory of extra pattern templates")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("render", help="render a trace as an SVG diagram")
    p.add_argument("--trace", required=True)
    p.add_argument("--report", help="reuse a saved analysis report")
    p.add_argument("--svg", help="output file (default: stdout)")
    p.add_argument("--collapse", action="store_true", help="collapse repeated pattern runs")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the sentinel (control plane + HTTP API)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--control-port", type=int, default=7700)
    p.add_argument("--http-port", type=int, default=7780)
    p.add_argument("--ui-dir", help="serve a built web UI from this directory at /ui")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("stage", help="run one pipeline stage over the network")
    p.add_argument("--role", required=True, choices=ROLES)
    p.add_argument("--in", dest="in_addr", help="tcp://host:port to listen on, or a trace file")
    p.add_argument("--out", help="tcp://host:port to connect to, or an output file")
    p.add_argument("--sentinel", help="sentinel control address host:port")
    p.add_argument(
        "--push-view",
        dest="push_view",
        help="POST the view document to this service URL (its /view endpoint)",
    )
    p.add_argument("--name", help="module name to register (default: role)")
    p.set_defaults(func=cmd_stage)

    p = sub.add_parser("pipeline", help="run a static multi-stage pipeline from a config file")
    p.add_argument("--config", required=True, help="JSON file naming stages and addresses")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        TraceError,
        InvalidSpec,
        TemplateInvalid,
        SchemaViolation,
        GraphError,
        StageFailure,
        ConnectFailed,
        WireError,
        ValueError,
        OSError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
