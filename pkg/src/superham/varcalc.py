"""Variational operators, triviality decisions, and evolutionary fields.

The quotient of the polynomial algebra by total derivatives has no stored
normal form here: membership of ``p`` in ``(d/dx)(A) + C`` is *decided* by
checking that every variational derivative of ``p`` vanishes, and in the
trivial case an explicit anti-derivative is reconstructed by inverting the
degree operator on the image of the integration-by-parts rearrangement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .superpoly import (
    FamilyId,
    Generator,
    SuperPoly,
    is_homogeneous,
    minus_d_power,
    partial_derivative,
    total_derivative,
)


class _Components:
    """Finitely supported assignment of polynomials to families."""

    __slots__ = ("_comp",)

    def __init__(self, components: Mapping[FamilyId, SuperPoly] | None = None):
        acc: dict[FamilyId, SuperPoly] = {}
        for fam, poly in (components or {}).items():
            if not isinstance(fam, FamilyId) or not isinstance(poly, SuperPoly):
                raise TypeError("components must map FamilyId to SuperPoly")
            if not poly.is_zero():
                acc[fam] = poly
        self._comp = acc

    def __getitem__(self, family: FamilyId) -> SuperPoly:
        return self._comp.get(family, SuperPoly.zero())

    def families(self) -> list[FamilyId]:
        return sorted(self._comp, key=FamilyId.sort_key)

    def items(self) -> list[tuple[FamilyId, SuperPoly]]:
        return [(f, self._comp[f]) for f in self.families()]

    def is_zero(self) -> bool:
        return not self._comp

    def is_even_sector(self) -> bool:
        """Component at a parity-l family must itself have parity l."""
        return all(is_homogeneous(p, f.parity) for f, p in self._comp.items())

    def __eq__(self, other):
        if isinstance(other, _Components):
            return type(self) is type(other) and self._comp == other._comp
        return NotImplemented

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        acc = dict(self._comp)
        for fam, poly in other._comp.items():
            acc[fam] = acc.get(fam, SuperPoly.zero()) + poly
        return type(self)(acc)

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        acc = dict(self._comp)
        for fam, poly in other._comp.items():
            acc[fam] = acc.get(fam, SuperPoly.zero()) - poly
        return type(self)(acc)

    def __rmul__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            return type(self)({f: scalar * p for f, p in self._comp.items()})
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"{f.name}: {p}" for f, p in self.items())
        return f"{type(self).__name__}({{{inner}}})"


class VectorField(_Components):
    """Generating components u_f of an evolutionary derivation."""


class Covector(_Components):
    """Finitely supported functional coefficients paired against fields."""


def _require_even(obj: _Components, what: str) -> None:
    if not obj.is_even_sector():
        raise ValueError(f"{what} must lie in the even sector "
                         "(parity of each component equal to its family's parity)")


@dataclass(frozen=True)
class TildeVerdict:
    """Outcome of the triviality decision for one polynomial.

    Exactly one of (antiderivative, constant) / witness is populated: either
    ``p == D(antiderivative) + constant`` exactly, or ``witness`` names a
    family whose variational derivative of ``p`` is nonzero.
    """

    is_trivial: bool
    antiderivative: SuperPoly | None = None
    constant: Fraction | None = None
    witness: tuple[FamilyId, SuperPoly] | None = None


def variational_derivative(family: FamilyId, p: SuperPoly) -> SuperPoly:
    """Euler operator of one family: sum of (-D)^n applied after d/d psi^(n)."""
    total = SuperPoly.zero()
    for n in p.orders_of(family):
        total = total + minus_d_power(partial_derivative(Generator(family, n), p), n)
    return total


def _upsilon_inverse(p: SuperPoly) -> SuperPoly:
    # The degree operator is diagonal with eigenvalue = word length, so its
    # inverse divides each coefficient by the length; constants cannot occur.
    acc = {}
    for word, c in p.terms():
        if not word:
            raise ValueError("degree-operator inverse is undefined on constants")
        acc[word] = c / len(word)
    return SuperPoly._raw(acc)


def decide_trivial(p: SuperPoly) -> TildeVerdict:
    """Decide whether ``p`` is a total derivative plus a constant.

    Trivial branch reconstructs the anti-derivative: split off the constant,
    push every term into the image of d/dx by repeated integration by parts,
    then divide degreewise by the word length.
    """
    for fam in p.families():
        w = variational_derivative(fam, p)
        if not w.is_zero():
            return TildeVerdict(False, witness=(fam, w))
    lam = p.constant_term()
    w = SuperPoly.zero()
    for fam in p.families():
        orders = p.orders_of(fam)
        top = orders[-1]
        for n in range(1, top + 1):
            for m in range(0, top - n + 1):
                part = partial_derivative(Generator(fam, n + m), p)
                if part.is_zero():
                    continue
                w = w + SuperPoly.var(fam, m) * minus_d_power(part, n - 1)
    v = _upsilon_inverse(w)
    return TildeVerdict(True, antiderivative=v, constant=lam)


def evolutionary_derivative(u: VectorField, p: SuperPoly) -> SuperPoly:
    """Apply the evolutionary derivation generated by the even field ``u``."""
    _require_even(u, "evolutionary field")
    acc = SuperPoly.zero()
    for fam, comp in u.items():
        orders = p.orders_of(fam)
        if not orders:
            continue
        dn = comp
        prev = 0
        for n in orders:
            for _ in range(n - prev):
                dn = total_derivative(dn)
            prev = n
            acc = acc + dn * partial_derivative(Generator(fam, n), p)
    return acc


def field_bracket(u: VectorField, v: VectorField) -> VectorField:
    """Lie bracket of two even evolutionary fields, componentwise."""
    _require_even(u, "bracket argument")
    _require_even(v, "bracket argument")
    comp: dict[FamilyId, SuperPoly] = {}
    for fam in sorted(set(u.families()) | set(v.families()), key=FamilyId.sort_key):
        comp[fam] = evolutionary_derivative(u, v[fam]) - evolutionary_derivative(v, u[fam])
    return VectorField(comp)


def pair_polynomial(u: Covector, v: VectorField) -> SuperPoly:
    """Representative of the pairing class: sum of v_f * u_f over families."""
    acc = SuperPoly.zero()
    for fam in u.families():
        vf = v[fam]
        if not vf.is_zero():
            acc = acc + vf * u[fam]
    return acc


def pair_is_zero(u: Covector, v: VectorField) -> bool:
    """True when the pairing of ``u`` and ``v`` vanishes as a functional."""
    verdict = decide_trivial(pair_polynomial(u, v))
    return verdict.is_trivial and verdict.constant == 0
