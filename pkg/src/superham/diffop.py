"""Matrix differential operators and the Hamiltonian superoperator tests.

An operator is a finitely supported matrix, indexed by (row family, column
family), of one-variable differential operators ``sum_n a_n * D^n`` whose
coefficients are super polynomials.  Coefficients always sit to the left of
powers of D; compositions such as ``(-D)^n o a`` are eagerly expanded by the
Leibniz rule, so operator equality is structural.

The closedness test works with generic arguments: three fresh generator
families are adjoined per original family (one per slot, same parity), the
cyclic sum of directional derivatives is formed as a polynomial in the
enlarged algebra, and its class modulo total derivatives is decided by the
variational criterion.  The certificate is the list of nonzero variational
derivatives, empty exactly when the expression vanishes as a functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

from .superpoly import (
    PARITY_NAMES,
    FamilyId,
    Generator,
    SuperPoly,
    is_homogeneous,
    join_signed,
    parity_of,
    poly_pieces,
    poly_text,
    total_derivative,
)
from .varcalc import (
    Covector,
    VectorField,
    evolutionary_derivative,
    pair_polynomial,
    variational_derivative,
)


class PreconditionError(ValueError):
    """An operation was invoked outside its stated domain."""


class FormSymmetryError(ValueError):
    """A bilinear form violates its parity/order symmetry law."""

    def __init__(self, j1: FamilyId, j2: FamilyId, m: int):
        self.offending = (j1, j2, m)
        super().__init__(
            f"bilinear form violates its symmetry law at pair ({j1.name}, {j2.name}) order m={m}"
        )


@dataclass(frozen=True)
class Witness:
    """One violated constraint instance together with its nonzero residual."""

    constraint: str
    residual: object

    def __str__(self):
        return f"{self.constraint} = {self.residual}"


@dataclass(frozen=True)
class Verdict:
    passed: bool
    witnesses: tuple[Witness, ...] = ()

    def __post_init__(self):
        if self.passed != (not self.witnesses):
            raise ValueError("verdict must pass exactly when there are no witnesses")

    @classmethod
    def from_witnesses(cls, witnesses: Iterable[Witness]) -> "Verdict":
        ws = tuple(witnesses)
        return cls(not ws, ws)


class DiffOpEntry:
    """One matrix entry: a finite sum of coefficients times powers of D."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, SuperPoly] | None = None):
        acc: dict[int, SuperPoly] = {}
        for n, poly in (coeffs or {}).items():
            if n < 0:
                raise ValueError("operator order must be nonnegative")
            if not isinstance(poly, SuperPoly):
                raise TypeError("entry coefficients must be SuperPoly")
            if not poly.is_zero():
                acc[int(n)] = poly
        self._coeffs = acc

    def coefficient(self, n: int) -> SuperPoly:
        return self._coeffs.get(n, SuperPoly.zero())

    def orders(self) -> list[int]:
        return sorted(self._coeffs)

    def items(self) -> list[tuple[int, SuperPoly]]:
        return [(n, self._coeffs[n]) for n in self.orders()]

    def is_zero(self) -> bool:
        return not self._coeffs

    def __eq__(self, other):
        if isinstance(other, DiffOpEntry):
            return self._coeffs == other._coeffs
        return NotImplemented

    def __add__(self, other: "DiffOpEntry") -> "DiffOpEntry":
        if not isinstance(other, DiffOpEntry):
            return NotImplemented
        acc = dict(self._coeffs)
        for n, poly in other._coeffs.items():
            acc[n] = acc.get(n, SuperPoly.zero()) + poly
        return DiffOpEntry(acc)

    def __sub__(self, other: "DiffOpEntry") -> "DiffOpEntry":
        return self + (-other)

    def __neg__(self) -> "DiffOpEntry":
        return DiffOpEntry({n: -p for n, p in self._coeffs.items()})

    def __rmul__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            return DiffOpEntry({n: scalar * p for n, p in self._coeffs.items()})
        return NotImplemented

    def apply(self, q: SuperPoly) -> SuperPoly:
        """Evaluate ``sum_n a_n * D^n`` on a polynomial."""
        out = SuperPoly.zero()
        dq = q
        prev = 0
        for n in self.orders():
            for _ in range(n - prev):
                dq = total_derivative(dq)
            prev = n
            out = out + self._coeffs[n] * dq
        return out

    def __str__(self):
        return entry_text(self)

    def __repr__(self):
        return f"DiffOpEntry<{entry_text(self)}>"


def entry_text(e: DiffOpEntry) -> str:
    """Canonical surface rendering, highest power of D first."""
    if e.is_zero():
        return "0"
    pieces: list[tuple[str, str]] = []
    for n in sorted(e._coeffs, reverse=True):
        coeff = e._coeffs[n]
        if n == 0:
            pieces.extend(poly_pieces(coeff))
            continue
        dpart = "D" if n == 1 else f"D^{n}"
        terms = coeff.sorted_terms()
        if len(terms) == 1:
            word, c = terms[0]
            sign = "-" if c < 0 else "+"
            mag = -c if c < 0 else c
            body = ""
            if word:
                from .superpoly import _word_text  # local: shared canonical form

                body = _word_text(word) + "*"
                if mag != 1:
                    body = f"{mag}*{body}"
            elif mag != 1:
                body = f"{mag}*"
            pieces.append((sign, body + dpart))
        else:
            pieces.append(("+", f"({poly_text(coeff)})*{dpart}"))
    return join_signed(pieces)


def _compose_minus_d_power(a: SuperPoly, n: int) -> DiffOpEntry:
    # (-D)^n o a = (-1)^n * sum_k C(n, k) D^(n-k)(a) D^k
    derivs = [a]
    for _ in range(n):
        derivs.append(total_derivative(derivs[-1]))
    sign = -1 if n % 2 else 1
    return DiffOpEntry({k: sign * comb(n, k) * derivs[n - k] for k in range(n + 1)})


class MatrixDiffOp:
    """Finitely supported matrix of differential operators between families.

    Every stored coefficient must be parity-homogeneous with parity equal to
    the sum of its row and column parities; zero entries are dropped.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[tuple[FamilyId, FamilyId], DiffOpEntry] | None = None):
        acc: dict[tuple[FamilyId, FamilyId], DiffOpEntry] = {}
        for (row, col), entry in (entries or {}).items():
            if not isinstance(entry, DiffOpEntry):
                raise TypeError("operator entries must be DiffOpEntry")
            if entry.is_zero():
                continue
            expected = (row.parity + col.parity) % 2
            for n, a in entry.items():
                if not is_homogeneous(a, expected):
                    raise ValueError(
                        f"entry ({row.name}, {col.name}) coefficient at order {n} "
                        f"must be {PARITY_NAMES[expected]}, got {parity_of(a)}: {a}"
                    )
            acc[(row, col)] = entry
        self._entries = acc

    def entry(self, row: FamilyId, col: FamilyId) -> DiffOpEntry:
        return self._entries.get((row, col), DiffOpEntry())

    def keys(self) -> list[tuple[FamilyId, FamilyId]]:
        return sorted(self._entries, key=lambda rc: (rc[0].sort_key(), rc[1].sort_key()))

    def items(self) -> list[tuple[tuple[FamilyId, FamilyId], DiffOpEntry]]:
        return [(rc, self._entries[rc]) for rc in self.keys()]

    def is_zero(self) -> bool:
        return not self._entries

    def row_families(self) -> list[FamilyId]:
        return sorted({r for r, _ in self._entries}, key=FamilyId.sort_key)

    def col_families(self) -> list[FamilyId]:
        return sorted({c for _, c in self._entries}, key=FamilyId.sort_key)

    def families(self) -> list[FamilyId]:
        fams = {r for r, _ in self._entries} | {c for _, c in self._entries}
        return sorted(fams, key=FamilyId.sort_key)

    def __eq__(self, other):
        if isinstance(other, MatrixDiffOp):
            return self._entries == other._entries
        return NotImplemented

    def __add__(self, other: "MatrixDiffOp") -> "MatrixDiffOp":
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        acc = dict(self._entries)
        for key, entry in other._entries.items():
            acc[key] = acc.get(key, DiffOpEntry()) + entry
        return MatrixDiffOp(acc)

    def __rmul__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            return MatrixDiffOp({key: scalar * e for key, e in self._entries.items()})
        return NotImplemented

    def __repr__(self):
        inner = "; ".join(f"({r.name},{c.name}): {entry_text(e)}" for (r, c), e in self.items())
        return f"MatrixDiffOp<{inner}>"


def apply_operator(H: MatrixDiffOp, u: Covector) -> VectorField:
    """Evaluate the operator on a covector, producing an even vector field."""
    if not u.is_even_sector():
        raise ValueError("operator arguments must be even-sector covectors")
    comp: dict[FamilyId, SuperPoly] = {}
    for (row, col), entry in H.items():
        uc = u[col]
        if uc.is_zero():
            continue
        comp[row] = comp.get(row, SuperPoly.zero()) + entry.apply(uc)
    return VectorField(comp)


def super_adjoint(H: MatrixDiffOp) -> MatrixDiffOp:
    """The formal adjoint with the super sign twist; an involution."""
    acc: dict[tuple[FamilyId, FamilyId], DiffOpEntry] = {}
    for (row, col), entry in H.items():
        sign = -1 if (row.parity and col.parity) else 1
        out = DiffOpEntry()
        for n, a in entry.items():
            out = out + sign * _compose_minus_d_power(a, n)
        key = (col, row)
        acc[key] = acc.get(key, DiffOpEntry()) + out
    return MatrixDiffOp(acc)


def check_skew(H: MatrixDiffOp) -> Verdict:
    """Pass when the operator equals minus its super adjoint, entrywise."""
    residual = H + super_adjoint(H)
    witnesses = [
        Witness(f"skew: entry({r.name}, {c.name})", e) for (r, c), e in residual.items()
    ]
    return Verdict.from_witnesses(witnesses)


def coefficient_derivative(H: MatrixDiffOp, field: VectorField) -> MatrixDiffOp:
    """Differentiate every coefficient along an evolutionary field."""
    acc = {}
    for key, entry in H.items():
        acc[key] = DiffOpEntry(
            {n: evolutionary_derivative(field, a) for n, a in entry.items()}
        )
    return MatrixDiffOp(acc)


def directional_derivative(H: MatrixDiffOp, u: Covector) -> MatrixDiffOp:
    """Coefficientwise derivative of H along the field H(u); orders unchanged."""
    return coefficient_derivative(H, apply_operator(H, u))


def test_covectors(
    families: Iterable[FamilyId], slots: int = 3, avoid: Iterable[FamilyId] = ()
) -> tuple[list[Covector], list[FamilyId]]:
    """Adjoin ``slots`` fresh generator families per original family.

    Returns one formal covector per slot (each mapping the original family to
    its fresh order-0 generator) plus the list of fresh families.  Names and
    positions never collide with ``families`` or ``avoid``.
    """
    fams = sorted(set(families), key=FamilyId.sort_key)
    context = set(fams) | set(avoid)
    taken = {f.name for f in context}
    base = 1 + max((f.index for f in context), default=-1)
    covectors = []
    fresh_all = []
    for s in range(1, slots + 1):
        comp = {}
        for pos, f in enumerate(fams):
            name = f"u{s}_{f.name}"
            while name in taken:
                name = "_" + name
            taken.add(name)
            fresh = FamilyId(name, f.parity, base + (s - 1) * len(fams) + pos)
            fresh_all.append(fresh)
            comp[f] = SuperPoly.var(fresh)
        covectors.append(Covector(comp))
    return covectors, fresh_all


def _variational_certificate(expr: SuperPoly) -> list[tuple[FamilyId, SuperPoly]]:
    cert = []
    for fam in expr.families():
        delta = variational_derivative(fam, expr)
        if not delta.is_zero():
            cert.append((fam, delta))
    return cert


def _coefficient_families(*ops: MatrixDiffOp) -> set[FamilyId]:
    fams: set[FamilyId] = set()
    for H in ops:
        for _, entry in H.items():
            for _, a in entry.items():
                fams.update(a.families())
    return fams


def closedness_expression(H: MatrixDiffOp) -> tuple[SuperPoly, list[Covector]]:
    """Cyclic three-slot sum of paired directional derivatives, genericized."""
    covs, _ = test_covectors(H.families(), avoid=_coefficient_families(H))
    u1, u2, u3 = covs

    def term(ua: Covector, ub: Covector, uc: Covector) -> SuperPoly:
        dd = directional_derivative(H, ub)
        return pair_polynomial(uc, apply_operator(dd, ua))

    expr = term(u1, u2, u3) + term(u2, u3, u1) + term(u3, u1, u2)
    return expr, covs


def closedness_residual(H: MatrixDiffOp) -> list[tuple[FamilyId, SuperPoly]]:
    """Certificate for the closedness condition; empty means closed.

    Requires a skew operator.  The certificate lists every nonzero
    variational derivative of the generic cyclic sum, over original and test
    generator families alike.
    """
    if not check_skew(H).passed:
        raise PreconditionError("closedness is only defined for skew-symmetric operators")
    expr, _ = closedness_expression(H)
    return _variational_certificate(expr)


def check_hamiltonian(H: MatrixDiffOp) -> Verdict:
    """Skew-symmetry plus closedness, with whichever witnesses failed."""
    skew = check_skew(H)
    if not skew.passed:
        return skew
    cert = closedness_residual(H)
    witnesses = [Witness(f"closedness: delta[{f.name}]", r) for f, r in cert]
    return Verdict.from_witnesses(witnesses)


def schouten_residual(H1: MatrixDiffOp, H2: MatrixDiffOp) -> list[tuple[FamilyId, SuperPoly]]:
    """Certificate for the six-term super bracket of two skew operators.

    The bracket of an operator with itself is exactly twice the closedness
    expression, so the two certificates agree up to that factor.
    """
    for which, H in (("first", H1), ("second", H2)):
        if not check_skew(H).passed:
            raise PreconditionError(f"{which} operator of the bracket must be skew-symmetric")
    fams = sorted(set(H1.families()) | set(H2.families()), key=FamilyId.sort_key)
    (u1, u2, u3), _ = test_covectors(fams, avoid=_coefficient_families(H1, H2))

    def term(Hleft: MatrixDiffOp, Hright: MatrixDiffOp, ua, ub, uc) -> SuperPoly:
        dd = coefficient_derivative(Hright, apply_operator(Hleft, ub))
        return pair_polynomial(uc, apply_operator(dd, ua))

    expr = (
        term(H1, H2, u1, u2, u3)
        + term(H1, H2, u2, u3, u1)
        + term(H1, H2, u3, u1, u2)
        + term(H2, H1, u1, u2, u3)
        + term(H2, H1, u2, u3, u1)
        + term(H2, H1, u3, u1, u2)
    )
    return _variational_certificate(expr)


def schouten_bracket(H1: MatrixDiffOp, H2: MatrixDiffOp) -> Verdict:
    cert = schouten_residual(H1, H2)
    witnesses = [Witness(f"schouten: delta[{f.name}]", r) for f, r in cert]
    return Verdict.from_witnesses(witnesses)


def check_pair(H1: MatrixDiffOp, H2: MatrixDiffOp) -> Verdict:
    """Hamiltonian-pair test: both skew and all three brackets vanish."""
    witnesses: list[Witness] = []
    for label, H in (("H1", H1), ("H2", H2)):
        skew = check_skew(H)
        witnesses.extend(Witness(f"{label} {w.constraint}", w.residual) for w in skew.witnesses)
    if witnesses:
        return Verdict.from_witnesses(witnesses)
    for label, (Ha, Hb) in (("[1,1]", (H1, H1)), ("[2,2]", (H2, H2)), ("[1,2]", (H1, H2))):
        for f, r in schouten_residual(Ha, Hb):
            witnesses.append(Witness(f"schouten{label}: delta[{f.name}]", r))
    return Verdict.from_witnesses(witnesses)


def evolution_equation(H: MatrixDiffOp, density: SuperPoly) -> dict[FamilyId, SuperPoly]:
    """Right-hand sides of the evolution system generated by a density."""
    fams = sorted(set(H.col_families()) | set(density.families()), key=FamilyId.sort_key)
    gradient = Covector({f: variational_derivative(f, density) for f in fams})
    field = apply_operator(H, gradient)
    return {row: field[row] for row in H.row_families()}


@dataclass(frozen=True)
class BilinearFormFamily:
    """Constant bilinear forms on one parity sector, one value per order m.

    The admissible symmetry is order-dependent: swapping the arguments of the
    order-m form multiplies it by (-1)^(1 + parity + m).
    """

    parity: int
    values: Mapping[tuple[FamilyId, FamilyId, int], Fraction]

    def __post_init__(self):
        vals = {}
        for (j1, j2, m), v in dict(self.values).items():
            if j1.parity != self.parity or j2.parity != self.parity:
                raise ValueError(
                    f"form pair ({j1.name}, {j2.name}) does not match sector parity "
                    f"{PARITY_NAMES[self.parity]}"
                )
            if m < 0:
                raise ValueError("form order must be nonnegative")
            fv = Fraction(v)
            if fv:
                vals[(j1, j2, m)] = fv
        object.__setattr__(self, "values", vals)

    def value(self, j1: FamilyId, j2: FamilyId, m: int) -> Fraction:
        return self.values.get((j1, j2, m), Fraction(0))

    def orders(self) -> list[int]:
        return sorted({m for (_, _, m) in self.values})

    def symmetry_violations(self) -> list[tuple[FamilyId, FamilyId, int]]:
        """Key triples where the order-dependent swap law fails."""
        bad = []
        keys = set(self.values) | {(b, a, m) for (a, b, m) in self.values}
        for (a, b, m) in sorted(keys, key=lambda k: (k[0].sort_key(), k[1].sort_key(), k[2])):
            sign = -1 if (1 + self.parity + m) % 2 else 1
            if self.value(a, b, m) != sign * self.value(b, a, m):
                bad.append((a, b, m))
        return bad


def bilinear_form_operator(forms: Iterable[BilinearFormFamily]) -> MatrixDiffOp:
    """Block-diagonal constant-coefficient operator built from sector forms."""
    entries: dict[tuple[FamilyId, FamilyId], dict[int, SuperPoly]] = {}
    for form in forms:
        bad = form.symmetry_violations()
        if bad:
            raise FormSymmetryError(*bad[0])
        for (j1, j2, m), v in form.values.items():
            cell = entries.setdefault((j1, j2), {})
            cell[m] = cell.get(m, SuperPoly.zero()) + SuperPoly.const(v)
    return MatrixDiffOp({key: DiffOpEntry(c) for key, c in entries.items()})


@dataclass(frozen=True)
class LieSuperData:
    """Structure constants of a candidate Lie superalgebra on named basis."""

    basis: tuple[FamilyId, ...]
    constants: Mapping[tuple[FamilyId, FamilyId, FamilyId], Fraction]

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        members = set(self.basis)
        if len({b.name for b in self.basis}) != len(self.basis):
            raise ValueError("basis names must be unique")
        consts = {}
        for (b1, b2, b3), v in dict(self.constants).items():
            for b in (b1, b2, b3):
                if b not in members:
                    raise ValueError(f"bracket references unknown basis element {b.name}")
            if b3.parity != (b1.parity + b2.parity) % 2:
                raise ValueError(
                    f"bracket ({b1.name}, {b2.name}) -> {b3.name} violates the parity grading"
                )
            fv = Fraction(v)
            if fv:
                consts[(b1, b2, b3)] = fv
        object.__setattr__(self, "constants", consts)

    def constant(self, b1: FamilyId, b2: FamilyId, b3: FamilyId) -> Fraction:
        return self.constants.get((b1, b2, b3), Fraction(0))

    def bracket(self, b1: FamilyId, b2: FamilyId) -> dict[FamilyId, Fraction]:
        out: dict[FamilyId, Fraction] = {}
        for (a, b, c), v in self.constants.items():
            if a == b1 and b == b2:
                out[c] = out.get(c, Fraction(0)) + v
        return out


def linear_lie_operator(data: LieSuperData) -> MatrixDiffOp:
    """Order-zero multiplication operator whose entries are the brackets."""
    entries: dict[tuple[FamilyId, FamilyId], dict[int, SuperPoly]] = {}
    for (b1, b2, b3), v in data.constants.items():
        cell = entries.setdefault((b1, b2), {})
        cell[0] = cell.get(0, SuperPoly.zero()) + v * SuperPoly.var(b3)
    return MatrixDiffOp({key: DiffOpEntry(c) for key, c in entries.items()})
