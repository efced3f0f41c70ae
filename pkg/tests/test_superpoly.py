"""Core algebra: normal forms, derivations, grading."""

from fractions import Fraction

from superham import (
    FamilyId,
    Generator,
    SuperPoly,
    degree_operator,
    parity_of,
    partial_derivative,
    poly_text,
    substitute,
    total_derivative,
)
from support import random_poly


def test_odd_square_vanishes(theta):
    t = SuperPoly.var(theta)
    assert (t * t).is_zero()


def test_odd_reorder_flips_sign(theta):
    t0 = SuperPoly.var(theta)
    t1 = SuperPoly.var(theta, 1)
    assert t1 * t0 == -(t0 * t1)
    assert poly_text(t1 * t0) == "-theta*theta'"


def test_even_odd_cross_terms_cancel(psi, theta):
    p = SuperPoly.var(psi)
    t = SuperPoly.var(theta)
    assert (p + t) * (p - t) == p * p


def test_total_derivative_examples(psi, theta):
    p = SuperPoly.var(psi)
    assert total_derivative(p * p) == 2 * p * SuperPoly.var(psi, 1)
    t0, t1 = SuperPoly.var(theta), SuperPoly.var(theta, 1)
    assert total_derivative(t0 * t1) == t0 * SuperPoly.var(theta, 2)
    assert total_derivative(SuperPoly.const(5)).is_zero()


def test_partial_derivative_examples(psi, theta):
    p = SuperPoly.var(psi)
    assert partial_derivative(Generator(psi), p * p) == 2 * p
    t0, t1 = SuperPoly.var(theta), SuperPoly.var(theta, 1)
    assert partial_derivative(Generator(theta, 1), t0 * t1) == -t0
    assert partial_derivative(Generator(psi, 1), p * p).is_zero()


def test_degree_operator_examples(psi, theta):
    p, p2 = SuperPoly.var(psi), SuperPoly.var(psi, 2)
    assert degree_operator(p * p2) == 2 * p * p2
    assert degree_operator(SuperPoly.const(1)).is_zero()
    t0, t1 = SuperPoly.var(theta), SuperPoly.var(theta, 1)
    assert degree_operator(t0 * t1 * p) == 3 * t0 * t1 * p


def test_parity_classification(psi, theta):
    p, t = SuperPoly.var(psi), SuperPoly.var(theta)
    assert parity_of(p * t) == "odd"
    assert parity_of(p + t) == "mixed"
    assert parity_of(SuperPoly.zero()) == "zero"
    assert parity_of(p * p + SuperPoly.const(2)) == "even"


def test_exact_rational_arithmetic(psi):
    p = SuperPoly.var(psi)
    third = p / 3
    assert 3 * third == p
    assert (p / 7 * 7).coefficient((Generator(psi),)) == Fraction(1)


def _homogeneous_parts(p):
    even = SuperPoly({w: c for w, c in p.terms() if sum(g.parity for g in w) % 2 == 0})
    odd = p - even
    return even, odd


def test_super_commutativity_randomized(rng, psi, theta):
    fams = [psi, theta]
    for _ in range(200):
        a = random_poly(rng, fams)
        b = random_poly(rng, fams)
        for pa, ia in zip(_homogeneous_parts(a), (0, 1)):
            for pb, ib in zip(_homogeneous_parts(b), (0, 1)):
                sign = -1 if ia and ib else 1
                assert pa * pb == sign * (pb * pa)


def test_associativity_and_distributivity_randomized(rng, psi, theta):
    fams = [psi, theta]
    for _ in range(200):
        a = random_poly(rng, fams)
        b = random_poly(rng, fams)
        c = random_poly(rng, fams)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


def test_total_derivative_is_a_derivation(rng, psi, theta):
    fams = [psi, theta]
    for _ in range(200):
        a = random_poly(rng, fams)
        b = random_poly(rng, fams)
        assert total_derivative(a * b) == total_derivative(a) * b + a * total_derivative(b)


def test_partial_total_commutator(rng, psi, theta):
    # [d_{psi^(n)}, D] equals d_{psi^(n-1)} for n >= 1 and vanishes at n = 0
    fams = [psi, theta]
    for _ in range(200):
        p = random_poly(rng, fams, max_order=3)
        for fam in fams:
            for n in range(0, 4):
                g = Generator(fam, n)
                lhs = partial_derivative(g, total_derivative(p)) - total_derivative(
                    partial_derivative(g, p)
                )
                if n == 0:
                    assert lhs.is_zero()
                else:
                    assert lhs == partial_derivative(Generator(fam, n - 1), p)


def test_degree_operator_commutes_with_total_derivative(rng, psi, theta):
    fams = [psi, theta]
    for _ in range(200):
        p = random_poly(rng, fams)
        assert degree_operator(total_derivative(p)) == total_derivative(degree_operator(p))


def test_substitution_is_a_homomorphism(rng, psi, theta):
    fams = [psi, theta]
    from support import random_homogeneous

    for _ in range(60):
        a = random_poly(rng, fams)
        b = random_poly(rng, fams)
        values = {
            psi: random_homogeneous(rng, fams, 0),
            theta: random_homogeneous(rng, fams, 1),
        }
        assert substitute(a * b, values) == substitute(a, values) * substitute(b, values)
        assert substitute(total_derivative(a), values) == total_derivative(
            substitute(a, values)
        )


def test_rendering_matches_canonical_forms(psi, theta):
    p = SuperPoly.var(psi)
    p1 = SuperPoly.var(psi, 1)
    p3 = SuperPoly.var(psi, 3)
    assert poly_text(p3 + 6 * p * p1) == "psi''' + 6*psi*psi'"
    assert poly_text(p * p / 2) == "1/2*psi^2"
    assert poly_text(SuperPoly.var(psi, 5)) == "D^5[psi]"
    assert poly_text(SuperPoly.zero()) == "0"
    assert poly_text(p - SuperPoly.const(Fraction(3, 2))) == "psi - 3/2"
