"""Linear determining system for affine expanded Lie point symmetries.

An affine derivation acts as delta(Z) = L Z + T.  Stacking the unknowns as
K = (vec L row-major, T, lambda) makes every symmetry condition a linear,
homogeneous constraint with polynomial coefficients in Z, one residual per
expanded variable:

    time row        D_J delta(t) + lambda = 0
    active state j  sum_z delta(z) df_j/dz - d delta(x_j)/dt
                      - sum_{k in J} f_k d delta(x_j)/dx_k - lambda f_j = 0
    algebraic j     sum_z delta(z) df_j/dz - lambda f_j = 0
    parameter       D_J delta(theta) = 0

Residuals are cleared of denominators, so the coefficient matrix M(Z) is
polynomial and specialization only has to dodge finitely many pole
hypersurfaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ._poly import Poly
from ._scalar import Scalar
from .sysio import Expr, SystemSpec, differentiate

_ZERO = Scalar.zero()
_ONE = Scalar.one()


def unknown_count(m: int) -> int:
    return m * m + m + 1


def k_linear(m: int, i: int, j: int) -> int:
    """Unknown index of L[i][j] in the frozen (vec L, T, lambda) layout."""
    return i * m + j

def k_translation(m: int, i: int) -> int:
    return m * m + i


def k_lambda(m: int) -> int:
    return m * m + m


@dataclass(frozen=True)
class AffineDerivation:
    """Pair (L, T) with delta(Z) = L Z + T over the owning spec's order."""

    linear: tuple
    translation: tuple

    @property
    def m(self) -> int:
        return len(self.translation)

    @staticmethod
    def zero(m: int) -> "AffineDerivation":
        return AffineDerivation(
            tuple(tuple(_ZERO for _ in range(m)) for _ in range(m)),
            tuple(_ZERO for _ in range(m)),
        )

    @staticmethod
    def build(m: int, linear: dict | None = None, translation: dict | None = None):
        """Construct from sparse {(i, j): value} and {i: value} maps."""
        L = [[_ZERO] * m for _ in range(m)]
        T = [_ZERO] * m
        for (i, j), v in (linear or {}).items():
            L[i][j] = Scalar._coerce(v)
        for i, v in (translation or {}).items():
            T[i] = Scalar._coerce(v)
        return AffineDerivation(tuple(tuple(r) for r in L), tuple(T))

    def is_zero(self) -> bool:
        return all(s.is_zero() for s in self.translation) and all(
            s.is_zero() for row in self.linear for s in row
        )

    def action(self, j: int, nvars: int | None = None) -> Expr:
        """delta(z_j) as an affine expression (optionally over more vars)."""
        nv = self.m if nvars is None else nvars
        p = Poly.const(nv, self.translation[j])
        for k, c in enumerate(self.linear[j]):
            if not c.is_zero():
                p = p + Poly.var(nv, k).scale(c)
        return Expr.from_poly(nv, p)

    def coefficient_vector(self, lam: Scalar):
        """Flatten to the unknown layout (vec L, T, lambda)."""
        out = [c for row in self.linear for c in row]
        out.extend(self.translation)
        out.append(lam)
        return out

    def lt_vector(self):
        """Flatten L and T only (no lambda), for span arithmetic."""
        out = [c for row in self.linear for c in row]
        out.extend(self.translation)
        return out

    @staticmethod
    def from_kvector(vec, m: int):
        if len(vec) != unknown_count(m):
            raise ValueError("coefficient vector length does not match m")
        L = tuple(tuple(vec[i * m + j] for j in range(m)) for i in range(m))
        T = tuple(vec[m * m + i] for i in range(m))
        return AffineDerivation(L, T), vec[m * m + m]

    def support_size(self) -> int:
        """Nonzero (L, T) coefficient count; the chain tie-break measure."""
        n = sum(1 for row in self.linear for c in row if not c.is_zero())
        return n + sum(1 for c in self.translation if not c.is_zero())

    def acts_on(self, indices) -> bool:
        for j in indices:
            if not self.translation[j].is_zero():
                return True
            if any(not c.is_zero() for c in self.linear[j]):
                return True
        return False

    def describe(self, names) -> dict:
        """Nonzero actions rendered as strings, for reports."""
        from .sysio import print_expr

        out = {}
        for j, nm in enumerate(names):
            e = self.action(j)
            if not e.is_zero():
                out[nm] = print_expr(e, names)
        return out


def apply_derivation(d: AffineDerivation, e: Expr) -> Expr:
    """delta(f) = sum_z delta(z) * df/dz (Leibniz extension to fractions/logs)."""
    nv = e.nvars
    total = Expr.const(nv, 0)
    for j in range(d.m):
        dz = d.action(j, nv)
        if dz.is_zero():
            continue
        total = total + dz * differentiate(e, j)
    return total


@dataclass
class DeterminingSystem:
    """Residuals linear-homogeneous in K, with origins and cleared denominators."""

    spec: SystemSpec
    residuals: list
    origins: list
    denominators: list
    _coeff_polys: list | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def n_unknowns(self) -> int:
        return unknown_count(self.spec.m)

    def coefficient_polys(self):
        """m x (m^2+m+1) coefficient polynomials over Z (cached)."""
        if self._coeff_polys is None:
            self._coeff_polys = _extract_polys(self)
        return self._coeff_polys

    def residuals_for(self, d: AffineDerivation, lam: Scalar):
        """Substitute a concrete (delta, lambda); returns Exprs over Z."""
        m = self.spec.m
        k = d.coefficient_vector(lam)
        out = []
        for row in self.coefficient_polys():
            p = Poly.zero(m)
            for c, coeff_poly in enumerate(row):
                if not k[c].is_zero() and not coeff_poly.is_zero():
                    p = p + coeff_poly.scale(k[c])
            out.append(Expr.from_poly(m, p))
        return out

    def is_solution(self, d: AffineDerivation, lam: Scalar) -> bool:
        return all(r.is_zero() for r in self.residuals_for(d, lam))


def build_determining_system(spec: SystemSpec) -> DeterminingSystem:
    m = spec.m
    u = unknown_count(m)
    nv = m + u

    def kvar(c: int) -> Expr:
        return Expr.var(nv, m + c)

    def delta_of(i: int) -> Expr:
        p = Poly.var(nv, m + k_translation(m, i))
        for j in range(m):
            p = p + Poly.var(nv, m + k_linear(m, i, j)) * Poly.var(nv, j)
        return Expr.from_poly(nv, p)

    lam = kvar(k_lambda(m))
    deltas = [delta_of(i) for i in range(m)]

    # right-hand sides lifted to the extended variable space
    fs = {}
    for j, f in zip(spec.state_indices, spec.rhs):
        n, den = f.fraction()
        fs[j] = Expr.from_fraction(nv, n.pad(nv), den.pad(nv))

    def d_along(g: Expr) -> Expr:
        out = differentiate(g, 0)
        for j in spec.active:
            out = out + fs[j] * differentiate(g, j)
        return out

    residuals = []
    origins = []
    denominators = []

    def push(expr: Expr, origin: str):
        num, den = expr.fraction()
        residuals.append(Expr.from_poly(nv, num))
        origins.append(origin)
        denominators.append(den.project(m))

    push(d_along(deltas[0]) + lam, "time-row")
    for j in spec.state_indices:
        total = Expr.const(nv, 0)
        for z in range(m):
            df = differentiate(fs[j], z)
            if not df.is_zero():
                total = total + deltas[z] * df
        if j in spec.active:
            total = total - differentiate(deltas[j], 0)
            for k in spec.active:
                total = total - fs[k] * differentiate(deltas[j], k)
            origin = f"active-ode {spec.names[j]}"
        else:
            origin = f"algebraic {spec.names[j]}"
        push(total - lam * fs[j], origin)
    for j in spec.param_indices:
        push(d_along(deltas[j]), f"parameter {spec.names[j]}")
    return DeterminingSystem(spec, residuals, origins, denominators)


def _extract_polys(ds: DeterminingSystem):
    m = ds.spec.m
    u = ds.n_unknowns
    rows = []
    for r in ds.residuals:
        num, den = r.fraction()
        if not (den.is_constant() and den.constant_value().is_one()):
            raise ValueError("residuals must be denominator-free")
        # homogeneity: the constant-in-K part must vanish
        zeroed = num.substitute({m + c: Poly.zero(num.nvars) for c in range(u)})
        if not zeroed.is_zero():
            raise ValueError("residual is not homogeneous in the unknowns")
        row = []
        for c in range(u):
            coeff = num.diff(m + c)
            row.append(coeff.project(m))
        rows.append(row)
    return rows


def extract_coefficient_matrix(ds: DeterminingSystem):
    """M(Z) with M(Z) K = residuals, as expressions over Z."""
    m = ds.spec.m
    return [[Expr.from_poly(m, p) for p in row] for row in ds.coefficient_polys()]
