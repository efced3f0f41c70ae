"""Command-line interface: checks, conversions, and report emission.

Exit codes: 0 when every requested verdict passes, 1 when a check fails, and
2 when no check could be attempted (usage, parse, or resolution problems).

The structured report has exactly the fields ``command``, ``verdicts`` (each
with ``name``, ``pass``, ``witnesses``) and ``exitCode``.  Conversion-style
commands (to-operator, from-operator, evolve, vardelta, fmt) place their
output lines in the witnesses array of a single passing verdict; in text mode
those lines are printed bare.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from . import conformal as conf
from . import diffop as dop
from .superpoly import FamilyId, poly_text
from .workspace import (
    SourceError,
    Workspace,
    parse_workspace,
    serialize_conformal,
    serialize_operator,
    serialize_workspace,
    _family_line,
)


class UsageError(Exception):
    pass


class InputError(Exception):
    """Named object missing, or inputs outside a command's domain."""


@dataclass
class VerdictLine:
    name: str
    passed: bool
    witnesses: list[str] = field(default_factory=list)


@dataclass
class Report:
    command: str
    verdicts: list[VerdictLine] = field(default_factory=list)
    exit_code: int = 0
    output: list[str] = field(default_factory=list)  # text-mode payload
    errors: list[str] = field(default_factory=list)  # stderr diagnostics

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "verdicts": [
                    {"name": v.name, "pass": v.passed, "witnesses": list(v.witnesses)}
                    for v in self.verdicts
                ],
                "exitCode": self.exit_code,
            },
            indent=2,
        )

    def to_text(self) -> str:
        lines = list(self.output)
        for v in self.verdicts:
            if v.name.startswith("output:"):
                continue
            lines.append(f"{'PASS' if v.passed else 'FAIL'} {v.name}")
            for w in v.witnesses:
                lines.append(f"  witness: {w}")
        return "\n".join(lines)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="superham", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="subcommand")

    def common(p: _ArgumentParser) -> None:
        p.add_argument("file", nargs="?", help="workspace file (.shs)")
        p.add_argument("--workspace", help="workspace file (.shs)")
        p.add_argument("--format", choices=("text", "json"), default="text")

    for name, flags in (
        ("check-skew", ("operator",)),
        ("check-hamiltonian", ("operator",)),
        ("check-pair", ("operator2",)),
        ("schouten", ("operator2",)),
        ("check-lie", ("lie",)),
        ("check-cocycle", ("lie", "form")),
        ("check-conformal", ("structure",)),
        ("to-operator", ("structure",)),
        ("from-operator", ("operator",)),
        ("evolve", ("operator", "density")),
        ("vardelta", ("density",)),
        ("fmt", ()),
    ):
        p = sub.add_parser(name)
        common(p)
        for flag in flags:
            if flag == "operator":
                p.add_argument("--operator", required=True, help="operator binding name")
            elif flag == "operator2":
                p.add_argument(
                    "--operator", action="append", required=True,
                    help="operator binding name (give twice)",
                )
            elif flag == "lie":
                p.add_argument("--lie", required=True, help="lie binding name")
            elif flag == "form":
                p.add_argument("--form", required=True, help="form binding name")
            elif flag == "structure":
                p.add_argument("--structure", required=True, help="conformal binding name")
            elif flag == "density":
                p.add_argument("--density", required=True, help="poly binding name")
    return parser


def _load_workspace(args) -> Workspace:
    path = args.workspace or args.file
    if path is None:
        raise UsageError("a workspace file is required (positional or --workspace)")
    if args.workspace and args.file and args.workspace != args.file:
        raise UsageError("give the workspace either positionally or with --workspace, not both")
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise InputError(f"cannot read workspace {path!r}: {exc}") from exc
    return parse_workspace(text)


def _named(table: dict, kind: str, name: str):
    try:
        return table[name]
    except KeyError:
        raise InputError(f"no {kind} named {name!r} in the workspace") from None


def _verdict_line(name: str, verdict: dop.Verdict) -> VerdictLine:
    return VerdictLine(name, verdict.passed, [str(w) for w in verdict.witnesses])


def _payload(report: Report, name: str, lines: list[str]) -> None:
    report.output.extend(lines)
    report.verdicts.append(VerdictLine(f"output: {name}", True, list(lines)))


def _two_operators(ws: Workspace, args) -> tuple[dop.MatrixDiffOp, dop.MatrixDiffOp, str, str]:
    names = args.operator
    if len(names) != 2:
        raise UsageError("exactly two --operator flags are required")
    return (
        _named(ws.operators, "operator", names[0]),
        _named(ws.operators, "operator", names[1]),
        names[0],
        names[1],
    )


def run_command(argv: list[str]) -> Report:
    report = Report(command=" ".join(["superham", *argv]))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            raise UsageError("a subcommand is required")
        ws = _load_workspace(args)
        sub = args.subcommand

        if sub == "check-skew":
            H = _named(ws.operators, "operator", args.operator)
            report.verdicts.append(_verdict_line(f"skew[{args.operator}]", dop.check_skew(H)))
        elif sub == "check-hamiltonian":
            H = _named(ws.operators, "operator", args.operator)
            report.verdicts.append(
                _verdict_line(f"hamiltonian[{args.operator}]", dop.check_hamiltonian(H))
            )
        elif sub == "check-pair":
            H1, H2, n1, n2 = _two_operators(ws, args)
            report.verdicts.append(_verdict_line(f"pair[{n1},{n2}]", dop.check_pair(H1, H2)))
        elif sub == "schouten":
            H1, H2, n1, n2 = _two_operators(ws, args)
            report.verdicts.append(
                _verdict_line(f"schouten[{n1},{n2}]", dop.schouten_bracket(H1, H2))
            )
        elif sub == "check-lie":
            data = _named(ws.lie, "lie", args.lie)
            report.verdicts.append(_verdict_line(f"lie[{args.lie}]", conf.check_lie_super(data)))
        elif sub == "check-cocycle":
            data = _named(ws.lie, "lie", args.lie)
            forms = _named(ws.forms, "form", args.form)
            report.verdicts.append(
                _verdict_line(
                    f"cocycle[{args.lie},{args.form}]", conf.check_cocycle(data, forms)
                )
            )
        elif sub == "check-conformal":
            S = _named(ws.conformal, "conformal structure", args.structure)
            report.verdicts.append(
                _verdict_line(f"conformal[{args.structure}]", conf.check_conformal(S))
            )
        elif sub == "to-operator":
            S = _named(ws.conformal, "conformal structure", args.structure)
            H = conf.to_hamiltonian(S)
            lines = [_family_line(f) for f in sorted(S.basis, key=FamilyId.sort_key)]
            lines.append("")
            lines.extend(serialize_operator(args.structure, H))
            _payload(report, f"to-operator[{args.structure}]", lines)
        elif sub == "from-operator":
            H = _named(ws.operators, "operator", args.operator)
            S = conf.from_linear_operator(H)
            _payload(
                report,
                f"from-operator[{args.operator}]",
                serialize_conformal(args.operator, S),
            )
        elif sub == "evolve":
            H = _named(ws.operators, "operator", args.operator)
            L = _named(ws.polys, "poly", args.density)
            system = dop.evolution_equation(H, L)
            lines = [
                f"{fam.name}_t = {poly_text(rhs)}"
                for fam, rhs in sorted(system.items(), key=lambda kv: kv[0].sort_key())
            ]
            _payload(report, f"evolve[{args.operator},{args.density}]", lines)
        elif sub == "vardelta":
            L = _named(ws.polys, "poly", args.density)
            from .varcalc import variational_derivative

            fams = sorted(set(ws.families) | set(L.families()), key=FamilyId.sort_key)
            lines = [
                f"delta[{fam.name}] = {poly_text(variational_derivative(fam, L))}"
                for fam in fams
            ]
            _payload(report, f"vardelta[{args.density}]", lines)
        elif sub == "fmt":
            _payload(report, "fmt", serialize_workspace(ws).splitlines())
        else:  # pragma: no cover - argparse restricts choices
            raise UsageError(f"unknown subcommand {sub!r}")

        if any(not v.passed for v in report.verdicts):
            report.exit_code = 1
    except UsageError as exc:
        report.errors.append(f"usage error: {exc}")
        report.errors.append("run 'superham --help' for usage")
        report.exit_code = 2
    except SourceError as exc:
        report.errors.append(f"workspace error: {exc}")
        report.exit_code = 2
    except InputError as exc:
        report.errors.append(f"input error: {exc}")
        report.exit_code = 2
    except (dop.PreconditionError, dop.FormSymmetryError, conf.NonAffineCoefficientError) as exc:
        report.errors.append(f"{type(exc).__name__}: {exc}")
        report.exit_code = 2
    except ValueError as exc:
        report.errors.append(f"invalid input: {exc}")
        report.exit_code = 2
    return report


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    report = run_command(argv)
    fmt = "text"
    if "--format" in argv:
        try:
            fmt = argv[argv.index("--format") + 1]
        except IndexError:
            pass
    elif any(a.startswith("--format=") for a in argv):
        fmt = next(a.split("=", 1)[1] for a in argv if a.startswith("--format="))
    if fmt == "json":
        print(report.to_json())
    else:
        text = report.to_text()
        if text:
            print(text)
    for err in report.errors:
        print(err, file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
