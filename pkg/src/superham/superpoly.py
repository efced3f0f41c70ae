"""Exact super-commutative differential polynomial algebra.

Formal variables are the derivatives ``psi_f^(n)`` of finitely many even or
odd dependent variables ("families").  A polynomial is a sparse mapping from
normal-ordered words of generators to rational coefficients::

    {(g1, g2, ..., gk): Fraction, ...}

Words are kept sorted by the fixed total order (family parity, family
position, family name, derivative order).  Swapping two odd generators flips
the sign of the coefficient, and a repeated odd generator annihilates its
word, so every polynomial has exactly one stored form and equality is a
structural check.  The zero polynomial is the empty mapping.

Coefficients are ``fractions.Fraction`` throughout; nothing is ever rounded.
The scalar type enters only through ``_frac``, so another exact field (e.g.
Gaussian rationals) would be a drop-in replacement.

Partial derivatives with respect to a generator use the left
super-derivation convention:

    d_g(a*b) = d_g(a)*b + (-1)^(|g||a|) * a*d_g(b)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

EVEN = 0
ODD = 1

PARITY_NAMES = {EVEN: "even", ODD: "odd"}


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class FamilyId:
    """Label of one dependent-variable family, with its parity.

    ``index`` is the family's position within its parity class; together with
    the name it fixes the deterministic generator order used for normal forms.
    """

    name: str
    parity: int
    index: int = 0

    def __post_init__(self):
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"parity must be {EVEN} or {ODD}, got {self.parity!r}")

    def sort_key(self):
        return (self.parity, self.index, self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Generator:
    """The ``order``-th derivative of a family's dependent variable."""

    family: FamilyId
    order: int = 0

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("derivative order must be nonnegative")

    @property
    def parity(self) -> int:
        return self.family.parity

    def sort_key(self):
        return (*self.family.sort_key(), self.order)

    def __str__(self):
        return generator_text(self)


Word = tuple  # tuple[Generator, ...] in normal order


def _normal_word(factors: Iterable[Generator]) -> tuple[Word, int]:
    """Sort a generator word, tracking signs from odd-odd transpositions.

    Returns ``(word, sign)``; the sign is 0 when an odd generator repeats.
    """
    word = list(factors)
    sign = 1
    for i in range(1, len(word)):
        g = word[i]
        key = g.sort_key()
        j = i
        while j > 0 and word[j - 1].sort_key() > key:
            if g.parity == ODD and word[j - 1].parity == ODD:
                sign = -sign
            word[j] = word[j - 1]
            j -= 1
        word[j] = g
    for a, b in zip(word, word[1:]):
        if a == b and a.parity == ODD:
            return (), 0
    return tuple(word), sign


def _word_parity(word: Word) -> int:
    p = EVEN
    for g in word:
        p ^= g.parity
    return p


def _word_sort_key(word: Word):
    return tuple(g.sort_key() for g in word)


def _add_term(acc: dict, word: Word, coeff: Fraction) -> None:
    c = acc.get(word, 0) + coeff
    if c:
        acc[word] = c
    else:
        acc.pop(word, None)


class SuperPoly:
    """Element of the super-commutative differential polynomial algebra."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Word, Fraction] | None = None):
        acc: dict[Word, Fraction] = {}
        if terms:
            for word, coeff in terms.items():
                c = _frac(coeff)
                if not c:
                    continue
                nw, sign = _normal_word(word)
                if sign:
                    _add_term(acc, nw, sign * c)
        self._terms = acc

    @classmethod
    def _raw(cls, terms: dict[Word, Fraction]) -> "SuperPoly":
        # Internal fast path: `terms` must already be in normal form.
        p = object.__new__(cls)
        p._terms = terms
        return p

    @classmethod
    def zero(cls) -> "SuperPoly":
        return cls._raw({})

    @classmethod
    def const(cls, value) -> "SuperPoly":
        c = _frac(value)
        return cls._raw({(): c} if c else {})

    @classmethod
    def var(cls, family: FamilyId, order: int = 0) -> "SuperPoly":
        return cls._raw({(Generator(family, order),): Fraction(1)})

    @classmethod
    def of_generator(cls, g: Generator) -> "SuperPoly":
        return cls._raw({(g,): Fraction(1)})

    # -- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def terms(self) -> Iterator[tuple[Word, Fraction]]:
        return iter(self._terms.items())

    def sorted_terms(self) -> list[tuple[Word, Fraction]]:
        """Terms in the canonical display order (highest word first)."""
        return sorted(self._terms.items(), key=lambda kv: _word_sort_key(kv[0]), reverse=True)

    def coefficient(self, word: Iterable[Generator]) -> Fraction:
        nw, sign = _normal_word(word)
        if not sign:
            return Fraction(0)
        return sign * self._terms.get(nw, Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def families(self) -> list[FamilyId]:
        fams = {g.family for word in self._terms for g in word}
        return sorted(fams, key=FamilyId.sort_key)

    def generators(self) -> list[Generator]:
        gens = {g for word in self._terms for g in word}
        return sorted(gens, key=Generator.sort_key)

    def orders_of(self, family: FamilyId) -> list[int]:
        """Derivative orders of ``family`` that actually occur, ascending."""
        orders = {g.order for word in self._terms for g in word if g.family == family}
        return sorted(orders)

    # -- arithmetic ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, SuperPoly):
            return self._terms == other._terms
        return NotImplemented

    def __add__(self, other: "SuperPoly") -> "SuperPoly":
        if not isinstance(other, SuperPoly):
            return NotImplemented
        acc = dict(self._terms)
        for word, c in other._terms.items():
            _add_term(acc, word, c)
        return SuperPoly._raw(acc)

    def __sub__(self, other: "SuperPoly") -> "SuperPoly":
        if not isinstance(other, SuperPoly):
            return NotImplemented
        acc = dict(self._terms)
        for word, c in other._terms.items():
            _add_term(acc, word, -c)
        return SuperPoly._raw(acc)

    def __neg__(self) -> "SuperPoly":
        return SuperPoly._raw({w: -c for w, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, SuperPoly):
            acc: dict[Word, Fraction] = {}
            for w1, c1 in self._terms.items():
                for w2, c2 in other._terms.items():
                    nw, sign = _normal_word(w1 + w2)
                    if sign:
                        _add_term(acc, nw, sign * c1 * c2)
            return SuperPoly._raw(acc)
        if isinstance(other, (int, Fraction)):
            c = _frac(other)
            if not c:
                return SuperPoly.zero()
            return SuperPoly._raw({w: c * v for w, v in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.__mul__(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _frac(other)
            return self.__mul__(Fraction(1) / c)
        return NotImplemented

    def __pow__(self, n: int) -> "SuperPoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = SuperPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __str__(self):
        return poly_text(self)

    def __repr__(self):
        return f"SuperPoly<{poly_text(self)}>"


def parity_of(p: SuperPoly) -> str:
    """Common parity of the terms: 'even', 'odd', 'mixed', or 'zero'."""
    seen = {_word_parity(w) for w in p._terms}
    if not seen:
        return "zero"
    if len(seen) > 1:
        return "mixed"
    return PARITY_NAMES[seen.pop()]


def is_homogeneous(p: SuperPoly, parity: int) -> bool:
    """True when every term of ``p`` has the given parity (zero qualifies)."""
    return parity_of(p) in ("zero", PARITY_NAMES[parity])


def multiply(p: SuperPoly, q: SuperPoly) -> SuperPoly:
    return p * q


def total_derivative(p: SuperPoly) -> SuperPoly:
    """The even derivation sending each generator of order n to order n+1."""
    acc: dict[Word, Fraction] = {}
    for word, c in p._terms.items():
        for i, g in enumerate(word):
            bumped = Generator(g.family, g.order + 1)
            nw, sign = _normal_word(word[:i] + (bumped,) + word[i + 1 :])
            if sign:
                _add_term(acc, nw, sign * c)
    return SuperPoly._raw(acc)


def minus_d_power(p: SuperPoly, n: int) -> SuperPoly:
    """Apply (-d/dx)^n."""
    out = p
    for _ in range(n):
        out = total_derivative(out)
    return -out if n % 2 else out


def partial_derivative(g: Generator, p: SuperPoly) -> SuperPoly:
    """Left super-derivative with respect to one generator."""
    acc: dict[Word, Fraction] = {}
    for word, c in p._terms.items():
        prefix = EVEN
        for i, h in enumerate(word):
            if h == g:
                sign = -1 if (g.parity == ODD and prefix == ODD) else 1
                # deleting one factor keeps the word in normal order
                _add_term(acc, word[:i] + word[i + 1 :], sign * c)
            prefix ^= h.parity
    return SuperPoly._raw(acc)


def degree_operator(p: SuperPoly) -> SuperPoly:
    """Multiply each word by its length (constants are sent to zero)."""
    return SuperPoly._raw({w: c * len(w) for w, c in p._terms.items() if w})


def substitute(p: SuperPoly, values: Mapping[FamilyId, SuperPoly]) -> SuperPoly:
    """Graded substitution psi_f^(n) -> (d/dx)^n(values[f]).

    Families absent from ``values`` are left untouched.  Each replacement must
    be homogeneous of the family's parity, so the map is an algebra
    homomorphism commuting with the total derivative.
    """
    for fam, val in values.items():
        if not is_homogeneous(val, fam.parity):
            raise ValueError(f"substitution for {fam.name} must have parity {PARITY_NAMES[fam.parity]}")
    cache: dict[Generator, SuperPoly] = {}

    def image(g: Generator) -> SuperPoly:
        if g.family not in values:
            return SuperPoly.of_generator(g)
        got = cache.get(g)
        if got is None:
            got = values[g.family]
            for _ in range(g.order):
                got = total_derivative(got)
            cache[g] = got
        return got

    out = SuperPoly.zero()
    for word, c in p._terms.items():
        factor = SuperPoly.const(c)
        for g in word:
            factor = factor * image(g)
        out = out + factor
    return out


# -- canonical text form ----------------------------------------------------
#
# The same rendering is used by the workspace serializer, by witness output,
# and by str(); the surface parser accepts everything produced here.


def generator_text(g: Generator) -> str:
    if g.order == 0:
        return g.family.name
    if g.order <= 3:
        return g.family.name + "'" * g.order
    return f"D^{g.order}[{g.family.name}]"


def _word_text(word: Word) -> str:
    parts = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        text = generator_text(word[i])
        if j - i > 1:
            text += f"^{j - i}"
        parts.append(text)
        i = j
    return "*".join(parts)


def poly_pieces(p: SuperPoly) -> list[tuple[str, str]]:
    """Render to a list of (sign, magnitude-text) pairs, canonical order."""
    pieces = []
    for word, c in p.sorted_terms():
        sign = "-" if c < 0 else "+"
        mag = -c if c < 0 else c
        if word:
            body = _word_text(word)
            if mag != 1:
                body = f"{mag}*{body}"
        else:
            body = str(mag)
        pieces.append((sign, body))
    return pieces


def join_signed(pieces: list[tuple[str, str]]) -> str:
    if not pieces:
        return "0"
    sign0, body0 = pieces[0]
    out = ("-" if sign0 == "-" else "") + body0
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def poly_text(p: SuperPoly) -> str:
    return join_signed(poly_pieces(p))
