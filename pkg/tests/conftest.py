import random
from fractions import Fraction
from pathlib import Path

import pytest

from superham import (
    BilinearFormFamily,
    ConformalStructure,
    DiffOpEntry,
    FamilyId,
    LieSuperData,
    MatrixDiffOp,
    SuperPoly,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture
def psi():
    return FamilyId("psi", 0)


@pytest.fixture
def theta():
    return FamilyId("theta", 1)


@pytest.fixture
def rng():
    return random.Random(20260809)


@pytest.fixture
def kdv_op(psi):
    u = SuperPoly.var(psi)
    u1 = SuperPoly.var(psi, 1)
    return MatrixDiffOp(
        {(psi, psi): DiffOpEntry({3: SuperPoly.const(1), 1: 4 * u, 0: 2 * u1})}
    )


@pytest.fixture
def d_op(psi):
    return MatrixDiffOp({(psi, psi): DiffOpEntry({1: SuperPoly.const(1)})})


@pytest.fixture
def sl2_basis():
    return (FamilyId("e", 0, 0), FamilyId("f", 0, 1), FamilyId("h", 0, 2))


@pytest.fixture
def sl2(sl2_basis):
    e, f, h = sl2_basis
    return LieSuperData(
        sl2_basis,
        {
            (e, f, h): Fraction(1),
            (f, e, h): Fraction(-1),
            (h, e, e): Fraction(2),
            (e, h, e): Fraction(-2),
            (h, f, f): Fraction(-2),
            (f, h, f): Fraction(2),
        },
    )


@pytest.fixture
def bad_lie(sl2_basis):
    # antisymmetric completion of [e1,e2]=e2, [e1,e3]=2e3, [e2,e3]=e1
    e1, e2, e3 = sl2_basis
    return LieSuperData(
        sl2_basis,
        {
            (e1, e2, e2): Fraction(1),
            (e2, e1, e2): Fraction(-1),
            (e1, e3, e3): Fraction(2),
            (e3, e1, e3): Fraction(-2),
            (e2, e3, e1): Fraction(1),
            (e3, e2, e1): Fraction(-1),
        },
    )


@pytest.fixture
def super_1_1():
    # one odd generator squaring to a central even one
    h = FamilyId("h", 0, 0)
    q = FamilyId("q", 1, 0)
    return LieSuperData((h, q), {(q, q, h): Fraction(1)})


@pytest.fixture
def killing_form(sl2_basis):
    e, f, h = sl2_basis
    return BilinearFormFamily(
        0, {(e, f, 1): Fraction(1), (f, e, 1): Fraction(1), (h, h, 1): Fraction(2)}
    )


@pytest.fixture
def noninvariant_form(sl2_basis):
    e, _f, _h = sl2_basis
    return BilinearFormFamily(0, {(e, e, 1): Fraction(1)})


@pytest.fixture
def vir_family():
    return FamilyId("L", 0)


@pytest.fixture
def virasoro(vir_family):
    L = vir_family
    return ConformalStructure(
        (L,), {(L, L, L, 1, 0): Fraction(1), (L, L, L, 0, 1): Fraction(2)}
    )


@pytest.fixture
def virasoro_centered(vir_family):
    L = vir_family
    return ConformalStructure(
        (L,),
        {(L, L, L, 1, 0): Fraction(2), (L, L, L, 0, 1): Fraction(4)},
        {(L, L, 3): Fraction(6)},
    )


@pytest.fixture
def sl2_current(sl2):
    lam = {(b1, b2, b3, 0, 0): v for (b1, b2, b3), v in sl2.constants.items()}
    return ConformalStructure(sl2.basis, lam)
