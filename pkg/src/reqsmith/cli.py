"""Command-line front end: parse a model file, then format, audit,
query, propagate, translate, or grade it.

Exit codes follow the usual triage: 0 for a clean run, 1 when findings
or diagnostics were reported, 2 for usage, file, or parse errors. Every
subcommand accepts `--json` to emit the machine-readable report schema
instead of plain text.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .export import NestedUNotExportable, emit_owl, emit_report
from .lint import Issue, LintConfig, LintFinding, lint_model
from .membership import (
    MembershipError,
    format_degree,
    membership_intervals,
    membership_points,
)
from .model import Model, PointPrototypes
from .parser import parse_description, parse_model, print_model
from .reasoner import (
    ConsistencyStatus,
    SubsumptionVerdict,
    VerdictStatus,
    check_consistency,
    check_strength_tags,
    propagate_fulfillment,
    query,
)


class _CliError(Exception):
    """A usage or input problem; maps to exit code 2."""


def _load_model(path: str) -> Model:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise _CliError(str(err)) from err
    result = parse_model(text, file=path)
    if isinstance(result, list):
        raise _CliError("\n".join(str(d) for d in result))
    return result


def _finding_line(finding: LintFinding) -> str:
    line = f"{finding.element_id}: {finding.issue.value}: {finding.detail}"
    if finding.suggested_operator is not None:
        line += f" [suggest {finding.suggested_operator}]"
    return line


def _print_findings(findings, as_json: bool) -> int:
    if as_json:
        print(emit_report(findings, {}, []), end="")
    else:
        for finding in findings:
            print(_finding_line(finding))
    return 1 if findings else 0


def _cmd_fmt(args) -> int:
    model = _load_model(args.file)
    if args.json:
        print(emit_report([], {}, []), end="")
    else:
        print(print_model(model), end="")
    return 0


def _cmd_check(args) -> int:
    model = _load_model(args.file)
    findings = []
    for diag in check_strength_tags(model, args.bound):
        findings.append(
            LintFinding(
                f"application[{diag.application_index}]",
                Issue.INCONSISTENT,
                diag.message,
            )
        )
    consistency = check_consistency(model, args.bound)
    if consistency.status is ConsistencyStatus.INCONSISTENT:
        for line in consistency.explanation:
            findings.append(LintFinding("world", Issue.INCONSISTENT, line))
    return _print_findings(findings, args.json)


_CASEFOLDED_KEYS = frozenset(
    {"universal_tokens", "attachment_tokens", "entity_terms", "quality_terms"}
)
_SET_KEYS = _CASEFOLDED_KEYS | {"communicative_heads"}
_TUPLE_KEYS = frozenset({"required_slots", "communicative_slots", "concern_joiners"})


def _parse_lint_config(text: str) -> LintConfig:
    """Read `key = value, value` lines into a lint configuration."""
    values = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, equals, rest = line.partition("=")
        key = key.strip()
        if not equals:
            raise _CliError(f"lint config line {number}: expected key = values")
        if key not in _SET_KEYS and key not in _TUPLE_KEYS:
            raise _CliError(f"lint config line {number}: unknown key {key!r}")
        items = []
        for part in rest.split(","):
            part = part.strip()
            if not part:
                continue
            if len(part) >= 2 and part.startswith('"') and part.endswith('"'):
                part = part[1:-1]
            if key in _CASEFOLDED_KEYS:
                part = part.casefold()
            items.append(part)
        values[key] = tuple(items) if key in _TUPLE_KEYS else frozenset(items)
    return LintConfig(**values)


def _cmd_lint(args) -> int:
    model = _load_model(args.file)
    config = LintConfig()
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as err:
            raise _CliError(str(err)) from err
        config = _parse_lint_config(text)
    return _print_findings(lint_model(model, config), args.json)


def _cmd_query(args) -> int:
    model = _load_model(args.file)
    pattern = parse_description(args.pattern)
    if isinstance(pattern, list):
        raise _CliError("\n".join(str(d) for d in pattern))
    matches = sorted(query(model, pattern))
    if args.json:
        verdict = SubsumptionVerdict(VerdictStatus.PROVEN, method="query")
        triples = [(match, args.pattern, verdict) for match in matches]
        print(emit_report([], {}, triples), end="")
    else:
        for match in matches:
            print(match)
    return 0


def _cmd_fulfill(args) -> int:
    model = _load_model(args.file)
    state = propagate_fulfillment(model, args.threshold)
    for warning in state.warnings:
        print(warning, file=sys.stderr)
    if args.json:
        print(emit_report([], state.states, []), end="")
    else:
        for element in model.elements:
            print(f"{element.id}: {state.states[element.id].value}")
    return 0


def _cmd_translate(args) -> int:
    model = _load_model(args.file)
    try:
        document = emit_owl(model)
    except NestedUNotExportable as err:
        print(err, file=sys.stderr)
        return 1
    try:
        Path(args.out).write_text(document, encoding="utf-8")
    except OSError as err:
        raise _CliError(str(err)) from err
    if args.json:
        print(emit_report([], {}, []), end="")
    return 0


def _cmd_membership(args) -> int:
    model = _load_model(args.file)
    spec = model.spec_for(args.quality)
    if spec is None:
        raise _CliError(
            f"no membership regions are declared for quality {args.quality!r}"
        )
    try:
        value = Fraction(args.value)
    except (ValueError, ZeroDivisionError) as err:
        raise _CliError(f"--value must be a number, not {args.value!r}") from err
    try:
        if isinstance(spec.regions[0].prototypes, PointPrototypes):
            degrees = membership_points(value, spec.regions)
        else:
            degrees = membership_intervals(value, spec.regions)
    except MembershipError as err:
        raise _CliError(str(err)) from err
    if args.region is not None:
        if args.region not in degrees:
            raise _CliError(
                f"region {args.region!r} is not declared for {args.quality}"
            )
        if args.json:
            report = {args.region: format_degree(degrees[args.region])}
            print(emit_report([], report, []), end="")
        else:
            print(format_degree(degrees[args.region]))
        return 0
    if args.json:
        report = {name: format_degree(d) for name, d in degrees.items()}
        print(emit_report([], report, []), end="")
    else:
        for region in spec.regions:
            print(f"{region.name}: {format_degree(degrees[region.name])}")
    return 0


_COMMANDS = {
    "fmt": _cmd_fmt,
    "check": _cmd_check,
    "lint": _cmd_lint,
    "query": _cmd_query,
    "fulfill": _cmd_fulfill,
    "translate": _cmd_translate,
    "membership": _cmd_membership,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reqsmith",
        description="Work with structured requirement models.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", metavar="FILE", help="model file to read")
        p.add_argument(
            "--json",
            action="store_true",
            help="emit the machine-readable report schema",
        )
        return p

    command("fmt", "pretty-print a model in canonical form")
    check = command("check", "audit strength tags and world consistency")
    check.add_argument(
        "--bound",
        type=int,
        default=None,
        help="counter-model size limit (default from DESIREE_BOUND)",
    )
    lint = command("lint", "review the model against the issue taxonomy")
    lint.add_argument("--config", default=None, help="lexicon config file")
    query_cmd = command("query", "list elements matching a description")
    query_cmd.add_argument("--pattern", required=True, help="description to match")
    fulfill = command("fulfill", "propagate fulfillment marks")
    fulfill.add_argument(
        "--threshold",
        type=int,
        default=None,
        help="count of fulfilled fan-out successors that suffices",
    )
    translate = command("translate", "write the model as an ontology document")
    translate.add_argument("--out", required=True, help="output path")
    membership = command("membership", "grade a value against declared regions")
    membership.add_argument("--quality", required=True, help="quality name")
    membership.add_argument("--value", required=True, help="observed value")
    membership.add_argument("--region", default=None, help="single region to grade")
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        code = exit_.code
        return 0 if code in (0, None) else 2
    try:
        return _COMMANDS[args.command](args)
    except _CliError as err:
        print(err, file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
