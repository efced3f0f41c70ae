"""Exact symbolic calculus for Hamiltonian superoperators in one variable.

The package decides whether matrix differential operators with super
polynomial coefficients are Hamiltonian, computes Schouten brackets and
Hamiltonian pairs, and realizes the two-way correspondence between such
operators and conformal superalgebra structure-constant tables.  All
arithmetic is exact rational; every failed check carries a concrete witness.
"""

from .superpoly import (
    EVEN,
    ODD,
    FamilyId,
    Generator,
    SuperPoly,
    degree_operator,
    generator_text,
    multiply,
    parity_of,
    partial_derivative,
    poly_text,
    substitute,
    total_derivative,
)
from .varcalc import (
    Covector,
    TildeVerdict,
    VectorField,
    decide_trivial,
    evolutionary_derivative,
    field_bracket,
    pair_is_zero,
    pair_polynomial,
    variational_derivative,
)
from .diffop import (
    BilinearFormFamily,
    DiffOpEntry,
    FormSymmetryError,
    LieSuperData,
    MatrixDiffOp,
    PreconditionError,
    Verdict,
    Witness,
    apply_operator,
    bilinear_form_operator,
    check_hamiltonian,
    check_pair,
    check_skew,
    closedness_expression,
    closedness_residual,
    directional_derivative,
    entry_text,
    evolution_equation,
    linear_lie_operator,
    schouten_bracket,
    schouten_residual,
    super_adjoint,
)
from .conformal import (
    CentralExtension,
    ConformalElement,
    ConformalStructure,
    NonAffineCoefficientError,
    YProduct,
    affine_structure,
    central_extension,
    check_cocycle,
    check_conformal,
    check_conjugation,
    check_jacobi_conformal,
    check_lie_super,
    conjugation_transform,
    from_linear_operator,
    to_hamiltonian,
    y_plus_product,
)
from .workspace import (
    ParseError,
    ResolveError,
    SourceError,
    Workspace,
    parse_workspace,
    serialize_workspace,
)

__version__ = "0.1.0"
