"""Command-line front end: ``plead validate|lint|export|ingest|explain|simulate``."""

from __future__ import annotations

import argparse
import json
import sys
from importlib.resources import files
from pathlib import Path
from typing import Sequence

from .delivery import DeliveryEngine, actions_to_jsonl, read_events_file
from .errors import PleadError
from .matcher import bind, compile_patterns, ico_coverage, load_coverage_map, load_patterns_file
from .ontology import to_turtle, vocabulary_turtle
from .provenance import ingest_file
from .registry import lint_registry, load_registry_file, matrix
from .render import RenderMode, load_templates_file, render, select_template
from .taxonomy import Perspective

DATA = files("plead") / "data"

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _default(name: str) -> str:
    return str(DATA / name)


def _emit(args: argparse.Namespace, payload: dict, text: str) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False) if args.json else text)


def cmd_validate(args: argparse.Namespace) -> int:
    reg = load_registry_file(args.registry)
    report = lint_registry(reg)
    _emit(args, {"ok": True, "requirements": len(reg), "lint": report.to_json()}, f"{len(reg)} requirements valid")
    return EXIT_OK


def cmd_lint(args: argparse.Namespace) -> int:
    report = lint_registry(load_registry_file(args.registry))
    lines = []
    for group in report.streamlining_groups:
        lines.append("streamline: " + ", ".join(group))
    lines += [f"rank: {w}" for w in report.rank_warnings]
    lines += [f"conciseness: {w}" for w in report.conciseness_warnings]
    _emit(args, report.to_json(), "\n".join(lines) if lines else "no findings")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    reg = load_registry_file(args.registry)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "ttl":
        (out / "vocabulary.ttl").write_text(vocabulary_turtle(), encoding="utf-8")
        (out / "instances.ttl").write_text(to_turtle(list(reg)), encoding="utf-8")
        written = ["vocabulary.ttl", "instances.ttl"]
    else:
        (out / "matrix.csv").write_text(matrix(reg).to_csv(), encoding="utf-8")
        written = ["matrix.csv"]
    _emit(args, {"written": [str(out / w) for w in written]}, "\n".join(str(out / w) for w in written))
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    g = ingest_file(args.trail)
    _emit(args, {"nodes": len(g.nodes), "edges": len(g.edges)}, f"{len(g.nodes)} nodes, {len(g.edges)} edges")
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    reg = load_registry_file(args.registry)
    req = reg[args.requirement] if args.requirement in reg else None
    if req is None:
        print(f"unknown requirement {args.requirement!r}", file=sys.stderr)
        return EXIT_INVALID
    recipient = next((rc for rc in req.classification.recipients if args.recipient in (rc.name, rc.alias)), None)
    if recipient is None:
        recipient = reg.resolve_recipient(args.recipient)
    g = ingest_file(args.trail)
    view = g.pre_decision() if req.classification.perspective is Perspective.EX_ANTE else g
    bindings = bind(compile_patterns(req, load_patterns_file(args.patterns)), view, args.subject)
    template = select_template(load_templates_file(args.templates, reg), req, recipient)
    mode = RenderMode(args.mode) if args.mode else (RenderMode.STRICT if recipient.is_outward else RenderMode.GAP_MARKED)
    inst = render(template, bindings, req, recipient, mode, args.at)
    _emit(args, inst.to_json(), inst.text)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    reg = load_registry_file(args.registry)
    engine = DeliveryEngine(reg, load_patterns_file(args.patterns), load_templates_file(args.templates, reg), args.at)
    g = ingest_file(args.trail)
    actions = engine.replay(read_events_file(args.events), g)

    out = Path(args.out)
    exp_dir = out / "explanations"
    exp_dir.mkdir(parents=True, exist_ok=True)
    for old in exp_dir.glob("*.txt"):
        old.unlink()
    (out / "actions.jsonl").write_text(actions_to_jsonl(actions), encoding="utf-8")
    for n, a in enumerate(actions, start=1):
        if a.explanation is not None:
            name = f"{n:03d}_{a.requirement_id}_{a.recipients[0].name}.txt"
            (exp_dir / name).write_text(a.explanation.text + "\n", encoding="utf-8")

    summary: dict = {"actions": len(actions), "deferred": sum(a.explanation is None for a in actions)}
    if args.coverage:
        cov_map = load_coverage_map(Path(args.coverage).read_text(encoding="utf-8"))
        runs = [
            a.explanation.bindings
            for a in actions
            if a.explanation is not None and reg[a.requirement_id].classification.perspective is Perspective.EX_POST
        ]
        report = ico_coverage(cov_map, runs)
        (out / "coverage.json").write_text(json.dumps(report.to_json(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        summary["coverage_complete"] = report.complete
    text = f"{summary['actions']} actions ({summary['deferred']} deferred) written to {out}"
    if "coverage_complete" in summary:
        text += "; ICO coverage " + ("complete" if summary["coverage_complete"] else "INCOMPLETE")
    _emit(args, summary, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--registry", default=_default("gdpr_art22.json"))
    common.add_argument("--json", action="store_true", help="machine-readable output")

    content = argparse.ArgumentParser(add_help=False)
    content.add_argument("--patterns", default=_default("loan_patterns.json"))
    content.add_argument("--templates", default=_default("loan_templates.json"))
    content.add_argument("--trail", default=_default("loan_trail.jsonl"))
    content.add_argument("--at", help="fixed generation instant (ISO-8601)")

    parser = argparse.ArgumentParser(prog="plead", description="Explanation requirements toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="load and validate a registry")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("lint", parents=[common], help="report streamlining, rank and conciseness findings")
    p.set_defaults(func=cmd_lint)
    p = sub.add_parser("export", parents=[common], help="write Turtle or the classification matrix")
    p.add_argument("--format", choices=("ttl", "csv"), default="ttl")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_export)
    p = sub.add_parser("ingest", parents=[common], help="load and check an audit trail")
    p.add_argument("--trail", default=_default("loan_trail.jsonl"))
    p.set_defaults(func=cmd_ingest)
    p = sub.add_parser("explain", parents=[common, content], help="render one explanation")
    p.add_argument("requirement")
    p.add_argument("subject")
    p.add_argument("recipient")
    p.add_argument("--mode", choices=[m.value for m in RenderMode])
    p.set_defaults(func=cmd_explain)
    p = sub.add_parser("simulate", parents=[common, content], help="replay an event log")
    p.add_argument("--events", default=_default("loan_events.jsonl"))
    p.add_argument("--out", default="out")
    p.add_argument("--coverage", nargs="?", const=_default("ico_coverage.json"), help="ICO coverage map")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PleadError as exc:
        if args.json:
            print(json.dumps({"ok": False, "errors": [exc.to_json()]}, indent=2, ensure_ascii=False))
        else:
            print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
