"""Lie bracket structure of a symmetry basis and reduction-chain selection.

For affine derivations the commutator is affine again:

    [d1, d2](Z) = (L2 L1 - L1 L2) Z + (L2 T1 - L1 T2)

The reducer wants a usable generator spanning a one-dimensional ideal of
the basis span ("a symmetry of the others"); when kernels carry spurious
constant-multiples no such ideal may exist, and selection falls back to the
generator with the fewest nonzero brackets, flagged as heuristic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from . import _linalg
from ._scalar import Scalar
from .detsys import AffineDerivation
from .linsolve import SymmetryBasis, SymredWarning

_ZERO = Scalar.zero()


def bracket(d1: AffineDerivation, d2: AffineDerivation) -> AffineDerivation:
    if d1.m != d2.m:
        raise ValueError("derivations live over different variable sets")
    l1 = [list(r) for r in d1.linear]
    l2 = [list(r) for r in d2.linear]
    lin = _linalg.mat_sub(_linalg.matmul(l2, l1), _linalg.matmul(l1, l2))
    t = [
        a - b
        for a, b in zip(_linalg.matvec(l2, list(d1.translation)), _linalg.matvec(l1, list(d2.translation)))
    ]
    return AffineDerivation(tuple(tuple(r) for r in lin), tuple(t))


@dataclass
class BracketTable:
    """Structure coefficients c with [d_i, d_j] = sum_k c_k d_k where possible.

    coefficients[(i, j)] is the coefficient tuple, or None when the
    commutator leaves the basis span; the residual derivation is then kept
    so nothing is silently projected.
    """

    coefficients: dict
    residuals: dict
    brackets: dict

    def is_closed(self) -> bool:
        return all(v is not None for v in self.coefficients.values())


def build_bracket_table(basis: SymmetryBasis) -> BracketTable:
    gens = basis.generators
    n = len(gens)
    columns = [g.derivation.lt_vector() for g in gens]
    a_t = columns  # solve works on the row-stacked transpose below
    coefficients = {}
    residuals = {}
    brackets = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                coefficients[(i, j)] = tuple(_ZERO for _ in range(n))
                residuals[(i, j)] = None
                brackets[(i, j)] = AffineDerivation.zero(gens[0].derivation.m) if gens else None
                continue
            if j < i:
                cij = coefficients[(j, i)]
                coefficients[(i, j)] = None if cij is None else tuple(-c for c in cij)
                res = residuals[(j, i)]
                brk = brackets[(j, i)]
                residuals[(i, j)] = None if res is None else _negate(res)
                brackets[(i, j)] = _negate(brk)
                continue
            br = bracket(gens[i].derivation, gens[j].derivation)
            brackets[(i, j)] = br
            target = br.lt_vector()
            sol = _linalg.solve(_linalg.transpose(a_t), target) if a_t else None
            if sol is None:
                coefficients[(i, j)] = None
                residuals[(i, j)] = br
            else:
                coefficients[(i, j)] = tuple(sol)
                residuals[(i, j)] = None
    return BracketTable(coefficients, residuals, brackets)


def _negate(d: AffineDerivation) -> AffineDerivation:
    return AffineDerivation(
        tuple(tuple(-c for c in row) for row in d.linear),
        tuple(-c for c in d.translation),
    )


def _spans_ideal(basis: SymmetryBasis, table: BracketTable, i: int) -> bool:
    vec = basis.generators[i].derivation.lt_vector()
    for j in range(len(basis.generators)):
        br = table.brackets[(j, i)]
        if not _linalg.is_multiple(vec, br.lt_vector()):
            return False
    return True


def generator_preference(basis: SymmetryBasis, table: BracketTable):
    """Usable generators in reduction order, plus a heuristic flag.

    Ideal-spanning generators come first, ordered by coefficient support
    then basis index; if none exists the order minimizes the number of
    nonzero brackets with the rest of the basis (the documented heuristic).
    """
    usable = [i for i, g in enumerate(basis.generators) if g.reduction_usable]
    if not usable:
        return [], False
    ideal = [i for i in usable if _spans_ideal(basis, table, i)]
    if ideal:
        ideal.sort(key=lambda i: (basis.generators[i].derivation.support_size(), i))
        rest = [i for i in usable if i not in ideal]
        rest.sort(key=lambda i: (_bracket_count(basis, table, i), basis.generators[i].derivation.support_size(), i))
        return ideal + rest, False
    order = sorted(
        usable,
        key=lambda i: (_bracket_count(basis, table, i), basis.generators[i].derivation.support_size(), i),
    )
    return order, True


def _bracket_count(basis: SymmetryBasis, table: BracketTable, i: int) -> int:
    return sum(
        1
        for j in range(len(basis.generators))
        if j != i and not table.brackets[(j, i)].is_zero()
    )


def choose_generator(basis: SymmetryBasis, table: BracketTable):
    """Index of the next generator to rectify, or None to stop reducing."""
    order, heuristic = generator_preference(basis, table)
    if not order:
        return None
    if heuristic:
        warnings.warn(
            "no usable generator spans a one-dimensional ideal; "
            "solvable ordering is heuristic",
            SymredWarning,
            stacklevel=2,
        )
    return order[0]
