"""Probabilistic resolution of M(Z) K = 0 with exact certification.

Z is specialized at random integer points; specialized matrices are stacked
until the rank stabilizes (plus one spare stack as insurance against a
coincidental plateau), the kernel is extracted by exact elimination over
Q(i), and every kernel vector is verified symbolically before it is kept.
A failed verification means an unlucky specialization; the solve retries
with fresh points, at most five rounds.  Everything is deterministic in the
seed.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from . import _linalg
from ._scalar import Scalar
from .detsys import AffineDerivation, DeterminingSystem
from .sysio import SymredError

_ZERO = Scalar.zero()
_ONE = Scalar.one()

POINT_RANGE = 10_000  # coordinates drawn from [-POINT_RANGE, POINT_RANGE]
MAX_ROUNDS = 5


class SymredWarning(UserWarning):
    """Non-fatal pipeline conditions (heuristic fallbacks, skipped passes)."""


class SolveError(SymredError):
    """Hard failure of the probabilistic kernel solve."""


@dataclass
class SpecializationTrace:
    seed: int
    points: list
    ranks: list
    matrix: list


@dataclass
class SymGenerator:
    derivation: AffineDerivation
    lam: Scalar
    verified: bool = True
    reduction_usable: bool | None = None

    def kvector(self):
        return self.derivation.coefficient_vector(self.lam)


@dataclass
class SymmetryBasis:
    spec: object
    generators: list = field(default_factory=list)

    def __len__(self):
        return len(self.generators)

    def kvectors(self):
        return [g.kvector() for g in self.generators]

    def contains(self, d: AffineDerivation, lam: Scalar) -> bool:
        """Exact span membership of a (derivation, lambda) pair."""
        return _linalg.in_span(self.kvectors(), d.coefficient_vector(lam))


def _sample_point(rng: random.Random, ds: DeterminingSystem):
    m = ds.spec.m
    for _ in range(1000):
        pt = [Scalar(rng.randint(-POINT_RANGE, POINT_RANGE)) for _ in range(m)]
        if all(not den.evaluate(pt).is_zero() for den in ds.denominators):
            return pt
    raise SolveError("could not find a pole-free specialization point")


def solve_kernel(ds: DeterminingSystem, seed: int):
    """Exact symmetry basis of the determining system, plus the trace."""
    rng = random.Random(seed)
    coeff = ds.coefficient_polys()
    u = ds.n_unknowns
    last_error = None
    for _ in range(MAX_ROUNDS):
        points = []
        ranks = []
        stacked = []
        elim = _linalg.IncrementalRref(u)

        def stack_one():
            pt = _sample_point(rng, ds)
            points.append(pt)
            for row in coeff:
                vals = [p.evaluate(pt) for p in row]
                stacked.append(vals)
                elim.add(vals)
            ranks.append(elim.rank)

        stack_one()
        stack_one()
        while ranks[-1] != ranks[-2]:
            stack_one()
        stack_one()  # spare stack against a coincidental rank plateau
        trace = SpecializationTrace(seed, points, ranks, stacked)

        kernel = elim.nullspace()
        generators = []
        ok = True
        for vec in kernel:
            d, lam = AffineDerivation.from_kvector(vec, ds.spec.m)
            if not ds.is_solution(d, lam):
                ok = False
                last_error = trace
                break
            generators.append(SymGenerator(d, lam, verified=True))
        if ok:
            return SymmetryBasis(ds.spec, generators), trace
    raise SolveError(
        "kernel verification kept failing after "
        f"{MAX_ROUNDS} rounds of fresh specializations; ranks seen: {last_error.ranks}"
    )


def solve_kernel_float(ds: DeterminingSystem, seed: int, tol: float = 1e-9):
    """Approx-tier solve: numpy nullspace of the stacked float matrix."""
    import numpy as np

    rng = random.Random(seed)
    u = ds.n_unknowns
    coeff = ds.coefficient_polys()
    points = []
    rows = []
    ranks = []

    def stack_one():
        pt = _sample_point(rng, ds)
        points.append(pt)
        for row in coeff:
            rows.append([complex(p.evaluate(pt)) for p in row])
        a = np.array(rows, dtype=complex)
        s = np.linalg.svd(a, compute_uv=False)
        ranks.append(int((s > tol * max(1.0, s[0])).sum()))

    stack_one()
    stack_one()
    while ranks[-1] != ranks[-2]:
        stack_one()
    stack_one()
    a = np.array(rows, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    r = int((s > tol * max(1.0, s[0])).sum())
    generators = []
    for row in vh[r:]:
        vec = [Scalar.from_complex(complex(z)) for z in row]
        d, lam = AffineDerivation.from_kvector(vec, ds.spec.m)
        generators.append(SymGenerator(d, lam, verified=False))
    trace = SpecializationTrace(seed, points, ranks, rows)
    return SymmetryBasis(ds.spec, generators), trace


def filter_spurious(basis: SymmetryBasis, spec) -> SymmetryBasis:
    """Flag generators that act on no parameter; everything is retained."""
    params = spec.param_indices
    out = []
    for g in basis.generators:
        usable = g.derivation.acts_on(params)
        out.append(SymGenerator(g.derivation, g.lam, g.verified, usable))
    return SymmetryBasis(basis.spec, out)


# ---------------------------------------------------------------------------
# LLL


def _gso(b):
    n = len(b)
    mu = [[Fraction(0)] * n for _ in range(n)]
    bstar = []
    norms = []
    for i in range(n):
        v = [Fraction(x) for x in b[i]]
        for j in range(len(bstar)):
            if norms[j] == 0:
                raise ValueError("LLL input must be linearly independent")
            mu[i][j] = Fraction(sum(x * y for x, y in zip(b[i], bstar[j])), 1) / norms[j]
            v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
        bstar.append(v)
        norms.append(sum(x * x for x in v))
    return mu, norms


def lll_integer(rows, delta=Fraction(3, 4)):
    """Textbook LLL on integer rows with exact rational Gram-Schmidt."""
    b = [list(r) for r in rows]
    n = len(b)
    if n <= 1:
        return b
    k = 1
    while k < n:
        mu, norms = _gso(b)
        for j in range(k - 1, -1, -1):
            q = (mu[k][j] + Fraction(1, 2)).__floor__()
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                mu, norms = _gso(b)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            k = max(k - 1, 1)
    return b


def lll_reduce(basis: SymmetryBasis) -> SymmetryBasis:
    """Sparsify the kernel basis by lattice reduction; span is preserved.

    Bases with approximate or properly complex entries are returned
    unchanged with a warning; the integer-lattice embedding only covers
    exact rational coefficient vectors.
    """
    vecs = basis.kvectors()
    if not vecs:
        return SymmetryBasis(basis.spec, [])
    exact_rational = all(s.exact and s.im == 0 for v in vecs for s in v)
    if not exact_rational:
        warnings.warn(
            "LLL skipped: basis has non-rational coefficients", SymredWarning, stacklevel=2
        )
        return SymmetryBasis(basis.spec, list(basis.generators))
    lattice = []
    for v in vecs:
        prim = _linalg.primitive_vector(v)
        lattice.append([int(s.re) for s in prim])
    reduced = lll_integer(lattice)
    m = basis.spec.m
    out = []
    for row in reduced:
        vec = _linalg.primitive_vector([Scalar(x) for x in row])
        d, lam = AffineDerivation.from_kvector(vec, m)
        out.append(SymGenerator(d, lam, verified=True))
    new_basis = SymmetryBasis(basis.spec, out)
    old = [[Fraction(s.re) for s in v] for v in vecs]
    new = [[Fraction(s.re) for s in v] for v in new_basis.kvectors()]
    if _rational_rank(old) != _rational_rank(old + new):
        raise SolveError("LLL changed the basis span")  # pragma: no cover
    return new_basis


def _rational_rank(rows) -> int:
    return _linalg.rank([[Scalar(x) for x in row] for row in rows])
