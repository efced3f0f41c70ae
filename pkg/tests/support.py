"""Shared test helpers: seeded random data and independent oracles.

The generating-function oracle here re-derives the conjugation and Jacobi
axioms directly from residue expansions of the truncated products, so it
shares no code path with the sparse structure-constant checkers it is used
to validate.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import comb, factorial

from superham import (
    ConformalElement,
    ConformalStructure,
    Covector,
    FamilyId,
    Generator,
    LieSuperData,
    SuperPoly,
    VectorField,
    YProduct,
    conjugation_transform,
    y_plus_product,
)

# -- random algebra elements --------------------------------------------------


def random_word(rng: random.Random, families, max_factors=2, max_order=2):
    gens = []
    for _ in range(rng.randint(0, max_factors)):
        fam = rng.choice(families)
        gens.append(Generator(fam, rng.randint(0, max_order)))
    return tuple(gens)


def random_poly(rng, families, terms=3, max_factors=2, max_order=2, with_constant=True):
    acc = SuperPoly.zero()
    for _ in range(rng.randint(1, terms)):
        word = random_word(rng, families, max_factors, max_order)
        if not with_constant and not word:
            continue
        coeff = Fraction(rng.randint(-4, 4), rng.choice((1, 1, 2, 3)))
        acc = acc + SuperPoly({word: coeff})
    return acc


def random_homogeneous(rng, families, parity, terms=2, max_factors=2, max_order=2):
    """Random polynomial all of whose words have the requested parity."""
    acc = SuperPoly.zero()
    attempts = 0
    added = 0
    want = rng.randint(1, terms)
    while added < want and attempts < 40:
        attempts += 1
        word = random_word(rng, families, max_factors, max_order)
        if sum(g.parity for g in word) % 2 != parity:
            continue
        coeff = Fraction(rng.randint(-3, 3), rng.choice((1, 1, 2)))
        acc = acc + SuperPoly({word: coeff})
        added += 1
    return acc


def random_field(rng, families, **kw) -> VectorField:
    return VectorField(
        {f: random_homogeneous(rng, families, f.parity, **kw) for f in families}
    )


def random_covector(rng, families, **kw) -> Covector:
    return Covector(
        {f: random_homogeneous(rng, families, f.parity, **kw) for f in families}
    )


# -- random structure tables ---------------------------------------------------


def random_skew_lie(rng, basis, lo=-2, hi=2, density=0.5) -> LieSuperData:
    """Structure constants satisfying super skew-symmetry by construction."""
    consts = {}
    for i, b1 in enumerate(basis):
        for b2 in basis[i:]:
            sign = -1 if (b1.parity and b2.parity) else 1
            for b3 in basis:
                if b3.parity != (b1.parity + b2.parity) % 2:
                    continue
                if rng.random() > density:
                    continue
                v = rng.randint(lo, hi)
                if not v:
                    continue
                if b1 == b2:
                    if sign == 1:
                        continue  # even-even diagonal is forced to vanish
                    consts[(b1, b1, b3)] = Fraction(v)
                else:
                    consts[(b1, b2, b3)] = Fraction(v)
                    consts[(b2, b1, b3)] = Fraction(-sign * v)
    return LieSuperData(tuple(basis), consts)


def random_conformal(rng, basis, max_nm=2, entries=4, lo=-2, hi=2) -> ConformalStructure:
    lam = {}
    for _ in range(rng.randint(1, entries)):
        b1 = rng.choice(basis)
        b2 = rng.choice(basis)
        targets = [b for b in basis if b.parity == (b1.parity + b2.parity) % 2]
        if not targets:
            continue
        b3 = rng.choice(targets)
        v = rng.randint(lo, hi)
        if not v:
            continue
        lam[(b1, b2, b3, rng.randint(0, max_nm), rng.randint(0, max_nm))] = Fraction(v)
    return ConformalStructure(tuple(basis), lam)


def structure_sum(S1: ConformalStructure, S2: ConformalStructure) -> ConformalStructure:
    lam = dict(S1.lam)
    for k, v in S2.lam.items():
        lam[k] = lam.get(k, Fraction(0)) + v
    mu = dict(S1.mu)
    for k, v in S2.mu.items():
        mu[k] = mu.get(k, Fraction(0)) + v
    center = S1.has_center or S2.has_center
    return ConformalStructure(S1.basis, lam, mu, has_center=center or None)


def symmetrized(S: ConformalStructure) -> ConformalStructure:
    """S plus its conjugation transform: always passes the conjugation test."""
    return structure_sum(S, conjugation_transform(S))


# -- generating-function oracles -----------------------------------------------


def _add_elem(acc: dict, key, elem: ConformalElement) -> None:
    total = acc.get(key, ConformalElement()) + elem
    if total.is_zero():
        acc.pop(key, None)
    else:
        acc[key] = total


def gf_conjugation_sides(S, f1: FamilyId, f2: FamilyId):
    """Both sides of the conjugation axiom on a basis pair, via residues."""
    u = ConformalElement.basis(f1)
    v = ConformalElement.basis(f2)
    lhs = y_plus_product(S, u, v)
    inner = y_plus_product(S, v, u)
    sign = -1 if (f1.parity and f2.parity) else 1
    acc: dict[int, ConformalElement] = {}
    for m, elem in inner.items():
        for r in range(m + 1):
            c = Fraction(sign * (-1) ** (m + 1), factorial(r))
            _add_elem(acc, m - r, c * elem.shift(r))
    return lhs, YProduct(acc)


def gf_conjugation_holds(S, f1, f2) -> bool:
    lhs, rhs = gf_conjugation_sides(S, f1, f2)
    return lhs == rhs


def gf_jacobi_sides(S, f1: FamilyId, f2: FamilyId, f3: FamilyId):
    """Both sides of the Jacobi axiom on a basis triple, via residues.

    Coefficients are indexed by the pair of z-powers (m1, m2).
    """
    u = ConformalElement.basis(f1)
    v = ConformalElement.basis(f2)
    w = ConformalElement.basis(f3)
    sign = -1 if (f1.parity and f2.parity) else 1
    lhs: dict[tuple[int, int], ConformalElement] = {}
    for m2, e2 in y_plus_product(S, v, w).items():
        for m1, e1 in y_plus_product(S, u, e2).items():
            _add_elem(lhs, (m1, m2), e1)
    for m1, e1 in y_plus_product(S, u, w).items():
        for m2, e2 in y_plus_product(S, v, e1).items():
            _add_elem(lhs, (m1, m2), (-sign) * e2)
    rhs: dict[tuple[int, int], ConformalElement] = {}
    for k, ek in y_plus_product(S, u, v).items():
        for m, em in y_plus_product(S, ek, w).items():
            for s in range(m + 1):
                _add_elem(rhs, (k + s, m - s), comb(k + s, s) * em)
    return lhs, rhs


def gf_jacobi_holds(S, f1, f2, f3) -> bool:
    lhs, rhs = gf_jacobi_sides(S, f1, f2, f3)
    return lhs == rhs


def gf_conformal_holds(S) -> bool:
    """Full axiom check through the generating-function route only."""
    for f1 in S.basis:
        for f2 in S.basis:
            if not gf_conjugation_holds(S, f1, f2):
                return False
    for f1 in S.basis:
        for f2 in S.basis:
            for f3 in S.basis:
                if not gf_jacobi_holds(S, f1, f2, f3):
                    return False
    return True
