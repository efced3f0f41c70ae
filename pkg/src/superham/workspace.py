"""Workspace file format: tokenizer, parser, and canonical serializer.

A workspace file declares generator families and then binds named objects:
polynomials, matrix differential operators, bracket tables, bilinear forms,
and conformal structure tables.  The serializer emits a deterministic
canonical ordering and the parser accepts everything the serializer (and the
witness renderers) produce, so parse o serialize is the identity.

Rational literals only; derivative orders are written with postfix primes up
to three or ``D^n[name]`` beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .conformal import ConformalStructure
from .diffop import (
    BilinearFormFamily,
    DiffOpEntry,
    LieSuperData,
    MatrixDiffOp,
    entry_text,
)
from .superpoly import EVEN, ODD, PARITY_NAMES, FamilyId, Generator, SuperPoly, poly_text


class SourceError(Exception):
    """Problem in a workspace document, with a source location."""

    def __init__(self, message: str, line: int, col: int):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


class ParseError(SourceError):
    pass


class ResolveError(SourceError):
    pass


RESERVED = {
    "family", "poly", "operator", "entry", "lie", "form", "conformal",
    "basis", "bracket", "pair", "lambda", "mu", "D",
}


@dataclass
class Workspace:
    families: list[FamilyId] = field(default_factory=list)
    polys: dict[str, SuperPoly] = field(default_factory=dict)
    operators: dict[str, MatrixDiffOp] = field(default_factory=dict)
    lie: dict[str, LieSuperData] = field(default_factory=dict)
    forms: dict[str, tuple[BilinearFormFamily, ...]] = field(default_factory=dict)
    conformal: dict[str, ConformalStructure] = field(default_factory=dict)

    def family(self, name: str) -> FamilyId | None:
        for fam in self.families:
            if fam.name == name:
                return fam
        return None


# -- tokenizer ----------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "nat" | "punct" | "eof"
    text: str
    line: int
    col: int


_PUNCT_TWO = ("->",)
_PUNCT_ONE = set(";,(){}[]=+-*/^'")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        i = 0
        while i < len(line):
            ch = line[i]
            col = i + 1
            if ch.isspace():
                i += 1
                continue
            if line.startswith("->", i):
                tokens.append(_Token("punct", "->", lineno, col))
                i += 2
                continue
            if ch in _PUNCT_ONE:
                tokens.append(_Token("punct", ch, lineno, col))
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < len(line) and line[j].isdigit():
                    j += 1
                tokens.append(_Token("nat", line[i:j], lineno, col))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(line) and (line[j].isalnum() or line[j] == "_"):
                    j += 1
                tokens.append(_Token("ident", line[i:j], lineno, col))
                i = j
                continue
            raise ParseError(f"unexpected character {ch!r}", lineno, col)
    last_line = len(text.splitlines()) or 1
    tokens.append(_Token("eof", "", last_line, 1))
    return tokens


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.ws = Workspace()

    # token plumbing

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.text == text and tok.kind in ("punct", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str, what: str | None = None) -> _Token:
        tok = self.peek()
        if not self.at(text):
            found = tok.text or "end of input"
            raise ParseError(f"expected {what or text!r}, found {found!r}", tok.line, tok.col)
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> _Token:
        tok = self.peek()
        if tok.kind != "ident":
            found = tok.text or "end of input"
            raise ParseError(f"expected {what}, found {found!r}", tok.line, tok.col)
        return self.advance()

    def expect_nat(self, what: str = "natural number") -> int:
        tok = self.peek()
        if tok.kind != "nat":
            found = tok.text or "end of input"
            raise ParseError(f"expected {what}, found {found!r}", tok.line, tok.col)
        self.advance()
        return int(tok.text)

    def fail(self, message: str, tok: _Token) -> None:
        raise ParseError(message, tok.line, tok.col)

    # document structure

    def parse(self) -> Workspace:
        while self.peek().kind != "eof":
            tok = self.peek()
            if self.accept("family"):
                self.family_decl()
            elif self.accept("poly"):
                self.poly_decl()
            elif self.accept("operator"):
                self.operator_decl()
            elif self.accept("lie"):
                self.lie_decl()
            elif self.accept("form"):
                self.form_decl()
            elif self.accept("conformal"):
                self.conformal_decl()
            else:
                self.fail(f"expected a declaration, found {tok.text!r}", tok)
        return self.ws

    def declared_name(self, kind: str, table) -> str:
        tok = self.expect_ident(f"{kind} name")
        if tok.text in RESERVED:
            self.fail(f"{tok.text!r} is a reserved word", tok)
        if tok.text in table:
            raise ResolveError(f"duplicate {kind} name {tok.text!r}", tok.line, tok.col)
        return tok.text

    def parity_clause(self) -> int:
        self.expect("parity")
        tok = self.expect_ident("'even' or 'odd'")
        if tok.text == "even":
            return EVEN
        if tok.text == "odd":
            return ODD
        self.fail(f"expected 'even' or 'odd', found {tok.text!r}", tok)

    def family_decl(self) -> None:
        tok = self.peek()
        name = self.declared_name("family", {f.name: f for f in self.ws.families})
        parity = self.parity_clause()
        self.expect(";")
        index = sum(1 for f in self.ws.families if f.parity == parity)
        self.ws.families.append(FamilyId(name, parity, index))
        del tok

    def resolve_family(self, tok: _Token) -> FamilyId:
        fam = self.ws.family(tok.text)
        if fam is None:
            raise ResolveError(f"unknown family {tok.text!r}", tok.line, tok.col)
        return fam

    def poly_decl(self) -> None:
        name = self.declared_name("poly", self.ws.polys)
        self.expect("=")
        value = self.parse_expr()
        self.expect(";")
        self.ws.polys[name] = value

    def operator_decl(self) -> None:
        name_tok = self.peek()
        name = self.declared_name("operator", self.ws.operators)
        self.expect("{")
        entries: dict[tuple[FamilyId, FamilyId], DiffOpEntry] = {}
        while not self.accept("}"):
            tok = self.peek()
            self.expect("entry", "'entry' or '}'")
            self.expect("(")
            row = self.resolve_family(self.expect_ident("family name"))
            self.expect(",")
            col = self.resolve_family(self.expect_ident("family name"))
            self.expect(")")
            self.expect("=")
            coeffs = self.parse_opexpr()
            self.expect(";")
            if (row, col) in entries:
                raise ResolveError(
                    f"duplicate entry ({row.name}, {col.name}) in operator {name!r}",
                    tok.line, tok.col,
                )
            entries[(row, col)] = DiffOpEntry(coeffs)
        try:
            self.ws.operators[name] = MatrixDiffOp(entries)
        except ValueError as exc:
            raise ResolveError(str(exc), name_tok.line, name_tok.col) from exc

    def basis_line(self, names: dict[str, FamilyId], members: list[FamilyId]) -> None:
        tok = self.expect_ident("basis name")
        if tok.text in RESERVED:
            self.fail(f"{tok.text!r} is a reserved word", tok)
        if tok.text in names:
            raise ResolveError(f"duplicate basis name {tok.text!r}", tok.line, tok.col)
        parity = self.parity_clause()
        self.expect(";")
        existing = self.ws.family(tok.text)
        if existing is not None:
            if existing.parity != parity:
                raise ResolveError(
                    f"basis {tok.text!r} declared {PARITY_NAMES[parity]} but family is "
                    f"{PARITY_NAMES[existing.parity]}", tok.line, tok.col,
                )
            fam = existing
        else:
            index = sum(1 for f in members if f.parity == parity)
            fam = FamilyId(tok.text, parity, index)
        names[tok.text] = fam
        members.append(fam)

    def basis_ref(self, names: dict[str, FamilyId]) -> FamilyId:
        tok = self.expect_ident("basis name")
        fam = names.get(tok.text)
        if fam is None:
            raise ResolveError(f"unknown basis element {tok.text!r}", tok.line, tok.col)
        return fam

    def signed_rational(self) -> Fraction:
        negative = self.accept("-")
        num = self.expect_nat("rational literal")
        den = 1
        if self.accept("/"):
            den = self.expect_nat("denominator")
        value = Fraction(num, den)
        return -value if negative else value

    def lie_decl(self) -> None:
        name_tok = self.peek()
        name = self.declared_name("lie", self.ws.lie)
        self.expect("{")
        names: dict[str, FamilyId] = {}
        members: list[FamilyId] = []
        constants: dict[tuple[FamilyId, FamilyId, FamilyId], Fraction] = {}
        while not self.accept("}"):
            tok = self.peek()
            if self.accept("basis"):
                self.basis_line(names, members)
            elif self.accept("bracket"):
                self.expect("(")
                b1 = self.basis_ref(names)
                self.expect(",")
                b2 = self.basis_ref(names)
                self.expect("->")
                b3 = self.basis_ref(names)
                self.expect(")")
                self.expect("=")
                value = self.signed_rational()
                self.expect(";")
                if (b1, b2, b3) in constants:
                    raise ResolveError(
                        f"duplicate bracket ({b1.name}, {b2.name} -> {b3.name})",
                        tok.line, tok.col,
                    )
                constants[(b1, b2, b3)] = value
            else:
                self.fail(f"expected 'basis', 'bracket' or '}}', found {tok.text!r}", tok)
        try:
            self.ws.lie[name] = LieSuperData(tuple(members), constants)
        except ValueError as exc:
            raise ResolveError(str(exc), name_tok.line, name_tok.col) from exc

    def form_decl(self) -> None:
        name_tok = self.peek()
        name = self.declared_name("form", self.ws.forms)
        self.expect("{")
        values: dict[tuple[FamilyId, FamilyId, int], Fraction] = {}
        while not self.accept("}"):
            tok = self.peek()
            self.expect("pair", "'pair' or '}'")
            self.expect("(")
            a = self.resolve_family(self.expect_ident("family name"))
            self.expect(",")
            b = self.resolve_family(self.expect_ident("family name"))
            self.expect(")")
            self.expect("[")
            mtok = self.expect_ident("'m'")
            if mtok.text != "m":
                self.fail(f"expected 'm', found {mtok.text!r}", mtok)
            self.expect("=")
            m = self.expect_nat()
            self.expect("]")
            self.expect("=")
            value = self.signed_rational()
            self.expect(";")
            if a.parity != b.parity:
                raise ResolveError(
                    f"form pair ({a.name}, {b.name}) mixes parities", tok.line, tok.col
                )
            if (a, b, m) in values:
                raise ResolveError(
                    f"duplicate pair ({a.name}, {b.name}) [m={m}]", tok.line, tok.col
                )
            values[(a, b, m)] = value
        sectors = sorted({a.parity for (a, _b, _m) in values})
        families = []
        for parity in sectors:
            sector_values = {k: v for k, v in values.items() if k[0].parity == parity}
            try:
                families.append(BilinearFormFamily(parity, sector_values))
            except ValueError as exc:
                raise ResolveError(str(exc), name_tok.line, name_tok.col) from exc
        self.ws.forms[name] = tuple(families)

    def conformal_decl(self) -> None:
        name_tok = self.peek()
        name = self.declared_name("conformal", self.ws.conformal)
        self.expect("{")
        names: dict[str, FamilyId] = {}
        members: list[FamilyId] = []
        lam: dict[tuple[FamilyId, FamilyId, FamilyId, int, int], Fraction] = {}
        mu: dict[tuple[FamilyId, FamilyId, int], Fraction] = {}
        while not self.accept("}"):
            tok = self.peek()
            if self.accept("basis"):
                self.basis_line(names, members)
            elif self.accept("lambda"):
                self.expect("(")
                b1 = self.basis_ref(names)
                self.expect(",")
                b2 = self.basis_ref(names)
                self.expect("->")
                b3 = self.basis_ref(names)
                self.expect(")")
                self.expect("[")
                ntok = self.expect_ident("'n'")
                if ntok.text != "n":
                    self.fail(f"expected 'n', found {ntok.text!r}", ntok)
                self.expect("=")
                n = self.expect_nat()
                self.expect(",")
                mtok = self.expect_ident("'m'")
                if mtok.text != "m":
                    self.fail(f"expected 'm', found {mtok.text!r}", mtok)
                self.expect("=")
                m = self.expect_nat()
                self.expect("]")
                self.expect("=")
                value = self.signed_rational()
                self.expect(";")
                if (b1, b2, b3, n, m) in lam:
                    raise ResolveError("duplicate lambda constant", tok.line, tok.col)
                lam[(b1, b2, b3, n, m)] = value
            elif self.accept("mu"):
                self.expect("(")
                b1 = self.basis_ref(names)
                self.expect(",")
                b2 = self.basis_ref(names)
                self.expect(")")
                self.expect("[")
                mtok = self.expect_ident("'m'")
                if mtok.text != "m":
                    self.fail(f"expected 'm', found {mtok.text!r}", mtok)
                self.expect("=")
                m = self.expect_nat()
                self.expect("]")
                self.expect("=")
                value = self.signed_rational()
                self.expect(";")
                if (b1, b2, m) in mu:
                    raise ResolveError("duplicate mu constant", tok.line, tok.col)
                mu[(b1, b2, m)] = value
            else:
                self.fail(
                    f"expected 'basis', 'lambda', 'mu' or '}}', found {tok.text!r}", tok
                )
        try:
            self.ws.conformal[name] = ConformalStructure(tuple(members), lam, mu)
        except ValueError as exc:
            raise ResolveError(str(exc), name_tok.line, name_tok.col) from exc

    # expressions

    def _at_generator_ref(self) -> bool:
        # 'D' '^' NAT '[' introduces a generator reference, not an operator term
        return (
            self.peek().kind == "ident"
            and self.peek().text == "D"
            and self.peek(1).text == "^"
            and self.peek(2).kind == "nat"
            and self.peek(3).text == "["
        )

    def parse_expr(self) -> SuperPoly:
        value = self.parse_product()
        while True:
            if self.accept("+"):
                value = value + self.parse_product()
            elif self.accept("-"):
                value = value - self.parse_product()
            else:
                return value

    def parse_product(self) -> SuperPoly:
        value = self.parse_factor()
        while self.accept("*"):
            value = value * self.parse_factor()
        return value

    def parse_factor(self) -> SuperPoly:
        if self.accept("-"):
            return -self.parse_factor()
        poly, gen = self.parse_atom()
        if self.at("^"):
            tok = self.peek()
            self.advance()
            exponent = self.expect_nat("exponent")
            if gen is None:
                self.fail("exponent applies only to a single generator", tok)
            if gen.parity == ODD:
                self.fail("exponent applies only to even generators", tok)
            return poly**exponent
        return poly

    def parse_atom(self) -> tuple[SuperPoly, Generator | None]:
        tok = self.peek()
        if tok.kind == "nat":
            self.advance()
            den = 1
            if self.accept("/"):
                den = self.expect_nat("denominator")
            return SuperPoly.const(Fraction(int(tok.text), den)), None
        if self.accept("("):
            value = self.parse_expr()
            self.expect(")")
            return value, None
        if tok.kind == "ident":
            if tok.text == "D":
                if not self._at_generator_ref():
                    self.fail("'D' outside operator expressions must be written D^n[name]", tok)
                self.advance()
                self.expect("^")
                order = self.expect_nat()
                self.expect("[")
                fam = self.resolve_family(self.expect_ident("family name"))
                self.expect("]")
                gen = Generator(fam, order)
                return SuperPoly.of_generator(gen), gen
            self.advance()
            fam = self.resolve_family(tok)
            order = 0
            while self.at("'"):
                if order == 3:
                    self.fail("at most three primes; use D^n[name] for higher orders", self.peek())
                self.advance()
                order += 1
            gen = Generator(fam, order)
            return SuperPoly.of_generator(gen), gen
        self.fail(f"expected an expression, found {tok.text or 'end of input'!r}", tok)

    def parse_opexpr(self) -> dict[int, SuperPoly]:
        coeffs: dict[int, SuperPoly] = {}

        def add(order: int, poly: SuperPoly) -> None:
            coeffs[order] = coeffs.get(order, SuperPoly.zero()) + poly

        self.parse_opterm(add, negative=self.accept("-"))
        while True:
            if self.accept("+"):
                self.parse_opterm(add, negative=False)
            elif self.accept("-"):
                self.parse_opterm(add, negative=True)
            else:
                return coeffs

    def parse_opterm(self, add, negative: bool) -> None:
        coef = SuperPoly.const(-1 if negative else 1)
        order = 0
        while True:
            tok = self.peek()
            if tok.kind == "ident" and tok.text == "D" and not self._at_generator_ref():
                self.advance()
                order = 1
                if self.accept("^"):
                    order = self.expect_nat("operator order")
                if self.at("*"):
                    self.fail("D must be the last factor of an operator term", self.peek())
                break
            coef = coef * self.parse_factor()
            if not self.accept("*"):
                break
        add(order, coef)


def parse_workspace(text: str) -> Workspace:
    """Parse a workspace document; raises SourceError with line/column."""
    return _Parser(text).parse()


# -- serializer ---------------------------------------------------------------


def _family_line(fam: FamilyId) -> str:
    return f"family {fam.name} parity {PARITY_NAMES[fam.parity]};"


def _basis_line(fam: FamilyId) -> str:
    return f"  basis {fam.name} parity {PARITY_NAMES[fam.parity]};"


def serialize_operator(name: str, op: MatrixDiffOp) -> list[str]:
    lines = [f"operator {name} {{"]
    for (row, col), entry in op.items():
        lines.append(f"  entry ({row.name}, {col.name}) = {entry_text(entry)};")
    lines.append("}")
    return lines


def serialize_lie(name: str, data: LieSuperData) -> list[str]:
    lines = [f"lie {name} {{"]
    for fam in sorted(data.basis, key=FamilyId.sort_key):
        lines.append(_basis_line(fam))
    for (b1, b2, b3), v in sorted(
        data.constants.items(),
        key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key(), kv[0][2].sort_key()),
    ):
        lines.append(f"  bracket ({b1.name}, {b2.name} -> {b3.name}) = {v};")
    lines.append("}")
    return lines


def serialize_form(name: str, families: Iterable[BilinearFormFamily]) -> list[str]:
    lines = [f"form {name} {{"]
    values = {}
    for fam in families:
        values.update(fam.values)
    for (a, b, m), v in sorted(
        values.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key(), kv[0][2])
    ):
        lines.append(f"  pair ({a.name}, {b.name}) [m={m}] = {v};")
    lines.append("}")
    return lines


def serialize_conformal(name: str, S: ConformalStructure) -> list[str]:
    lines = [f"conformal {name} {{"]
    for fam in sorted(S.basis, key=FamilyId.sort_key):
        lines.append(_basis_line(fam))
    for (b1, b2, b3, n, m), v in sorted(
        S.lam.items(),
        key=lambda kv: (
            kv[0][0].sort_key(), kv[0][1].sort_key(), kv[0][2].sort_key(), kv[0][3], kv[0][4],
        ),
    ):
        lines.append(f"  lambda ({b1.name}, {b2.name} -> {b3.name}) [n={n}, m={m}] = {v};")
    for (b1, b2, m), v in sorted(
        S.mu.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key(), kv[0][2])
    ):
        lines.append(f"  mu ({b1.name}, {b2.name}) [m={m}] = {v};")
    lines.append("}")
    return lines


def serialize_workspace(ws: Workspace) -> str:
    sections: list[list[str]] = []
    if ws.families:
        sections.append([_family_line(f) for f in sorted(ws.families, key=FamilyId.sort_key)])
    if ws.polys:
        sections.append(
            [f"poly {name} = {poly_text(p)};" for name, p in sorted(ws.polys.items())]
        )
    for name, op in sorted(ws.operators.items()):
        sections.append(serialize_operator(name, op))
    for name, data in sorted(ws.lie.items()):
        sections.append(serialize_lie(name, data))
    for name, fams in sorted(ws.forms.items()):
        sections.append(serialize_form(name, fams))
    for name, S in sorted(ws.conformal.items()):
        sections.append(serialize_conformal(name, S))
    if not sections:
        return ""
    return "\n\n".join("\n".join(section) for section in sections) + "\n"
