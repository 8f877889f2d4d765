"""Exact spectral machinery: principal elements, Jordan form, affine flows.

A principal element rho of an affine derivation (delta rho = 1) comes in
two shapes:

  ratio  rho = (C.Z)/(C.(LZ+T))            with C.L = 0 and C.T != 0
  log    rho = log(C.(Z + T/lambda))/lambda with tL C = lambda C != 0

The hyperplane form q is C.Z (ratio) or C.(Z + T/lambda) - 1 (log); its zero
set is the cross-section the reducer substitutes into.  The flow of the
derivation is exp(tau L) W plus the integrated translation term, computed in
closed form per Jordan block so every entry is a polynomial in tau times
exp(eigenvalue * tau).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from . import _linalg
from ._poly import ExpPoly, Poly
from ._scalar import Scalar
from .detsys import AffineDerivation
from .linsolve import SymredWarning
from .sysio import Expr, SymredError

_ZERO = Scalar.zero()
_ONE = Scalar.one()


class NoPrincipalElement(SymredError):
    """Neither principal-element condition holds for the derivation."""


# ---------------------------------------------------------------------------
# Characteristic polynomial and exact eigenvalues


def char_poly(mat):
    """Monic characteristic polynomial, coefficients ascending (exact)."""
    n = len(mat)
    coeffs = [_ZERO] * (n + 1)
    coeffs[n] = _ONE
    m = _linalg.zeros(n, n)
    for k in range(1, n + 1):
        m = _linalg.matmul(mat, m)
        ck = coeffs[n - k + 1]
        for i in range(n):
            m[i][i] = m[i][i] + ck
        lm = _linalg.matmul(mat, m)
        tr = _ZERO
        for i in range(n):
            tr = tr + lm[i][i]
        coeffs[n - k] = -(tr / Scalar(k))
    return coeffs


def upoly_eval(p, x: Scalar) -> Scalar:
    out = _ZERO
    for c in reversed(p):
        out = out * x + c
    return out


def upoly_deg(p) -> int:
    d = len(p) - 1
    while d >= 0 and p[d].is_zero():
        d -= 1
    return d


def upoly_divmod(num, den):
    dn, dd = upoly_deg(num), upoly_deg(den)
    if dd < 0:
        raise ZeroDivisionError("univariate division by zero")
    q = [_ZERO] * max(dn - dd + 1, 1)
    r = list(num[: dn + 1]) if dn >= 0 else [_ZERO]
    lead = den[dd]
    while True:
        dr = upoly_deg(r)
        if dr < dd:
            break
        f = r[dr] / lead
        q[dr - dd] = f
        for i in range(dd + 1):
            r[dr - dd + i] = r[dr - dd + i] - f * den[i]
    return q, r


def upoly_gcd(a, b):
    a, b = list(a), list(b)
    while upoly_deg(b) >= 0:
        _, r = upoly_divmod(a, b)
        a, b = b, r
    d = upoly_deg(a)
    if d < 0:
        return [_ONE]
    lead = a[d]
    return [c / lead for c in a[: d + 1]]


def upoly_diff(p):
    return [p[k].__mul__(Scalar(k)) for k in range(1, len(p))] or [_ZERO]


def exact_eigenvalues(mat):
    """Eigenvalues in Q(i) with multiplicities, or None if any lies outside.

    Numeric roots of the square-free part are snapped to small Gaussian
    rationals and certified by exact evaluation; the numeric step is only a
    guess generator, never trusted.
    """
    import numpy as np

    p = char_poly(mat)
    g = upoly_gcd(p, upoly_diff(p))
    sf, rem = upoly_divmod(p, g)
    if upoly_deg([Scalar._coerce(int(not r.is_zero())) for r in rem]) >= 0 and any(
        not r.is_zero() for r in rem
    ):  # pragma: no cover - gcd guarantees exact division
        raise ArithmeticError("square-free split failed")
    deg = upoly_deg(sf)
    if deg <= 0:
        return {}
    arr = np.array([complex(c) for c in reversed(sf[: deg + 1])], dtype=complex)
    roots = np.roots(arr)
    found = []
    for z in roots:
        cand = _snap_gaussian(complex(z), sf)
        if cand is None:
            return None
        if all(not (cand - c).is_zero() for c in found):
            found.append(cand)
    if len(found) != deg:
        return None
    out = {}
    for r in found:
        mult = 0
        q = p
        while True:
            q2, rem = upoly_divmod(q, [-r, _ONE])
            if any(not c.is_zero() for c in rem):
                break
            mult += 1
            q = q2
        out[r] = mult
    if sum(out.values()) != len(mat):
        return None  # pragma: no cover - certification above should prevent this
    return out


def _snap_gaussian(z: complex, poly):
    re = 0.0 if abs(z.real) < 1e-9 else z.real
    im = 0.0 if abs(z.imag) < 1e-9 else z.imag
    for limit in (1, 8, 64, 1024, 10**6, 10**9):
        cand = Scalar(Fraction(re).limit_denominator(limit), Fraction(im).limit_denominator(limit))
        if upoly_eval(poly, cand).is_zero():
            return cand
    return None


# ---------------------------------------------------------------------------
# Jordan normal form


@dataclass
class JordanData:
    """P, P^-1 and the block list (eigenvalue, size); P J P^-1 = L."""

    transform: list
    inverse: list
    blocks: list
    exact: bool

    def jordan_matrix(self):
        n = len(self.transform)
        j = _linalg.zeros(n, n)
        pos = 0
        for lam, size in self.blocks:
            for k in range(size):
                j[pos + k][pos + k] = lam
                if k + 1 < size:
                    j[pos + k][pos + k + 1] = _ONE
            pos += size
        return j


def jordan_form(mat) -> JordanData:
    """Exact Jordan form over Q(i); falls back to the float tier with a warning."""
    eig = exact_eigenvalues(mat)
    if eig is None:
        warnings.warn(
            "eigenvalues leave Q(i); downgrading Jordan form to the float tier",
            SymredWarning,
            stacklevel=2,
        )
        return _jordan_form_float(mat)
    n = len(mat)
    columns = []
    blocks = []
    for lam in sorted(eig, key=Scalar.sort_key):
        mult = eig[lam]
        a = [[mat[i][j] - (lam if i == j else _ZERO) for j in range(n)] for i in range(n)]
        kernels = [[]]
        power = _linalg.identity(n)
        while len(kernels[-1]) < mult:
            power = _linalg.matmul(power, a)
            kernels.append(_linalg.nullspace(power, n))
        s = len(kernels) - 1
        heads = []
        for k in range(s, 0, -1):
            target = (len(kernels[k]) - len(kernels[k - 1])) - sum(
                1 for _, h in heads if h > k
            )
            if target <= 0:
                continue
            span_rows = list(kernels[k - 1])
            for v, h in heads:
                if h > k:
                    w = v
                    for _ in range(h - k):
                        w = _linalg.matvec(a, w)
                    span_rows.append(w)
            elim = _linalg.IncrementalRref(n)
            for r in span_rows:
                elim.add(r)
            got = 0
            for cand in kernels[k]:
                if got == target:
                    break
                if elim.add(cand):
                    heads.append((cand, k))
                    got += 1
            if got != target:  # pragma: no cover - the chain count is forced
                raise ArithmeticError("Jordan chain extension failed")
        for v, h in sorted(heads, key=lambda vh: -vh[1]):
            chain = [v]
            for _ in range(h - 1):
                chain.append(_linalg.matvec(a, chain[-1]))
            columns.extend(reversed(chain))
            blocks.append((lam, h))
    p = _linalg.transpose(columns)
    pinv = _linalg.inverse(p)
    jd = JordanData(p, pinv, blocks, exact=True)
    recon = _linalg.matmul(_linalg.matmul(p, jd.jordan_matrix()), pinv)
    for i in range(n):
        for j in range(n):
            if not (recon[i][j] - mat[i][j]).is_zero():  # pragma: no cover
                raise ArithmeticError("Jordan reconstruction failed")
    return jd


def _jordan_form_float(mat) -> JordanData:
    """Float-tier Jordan data; only the diagonalizable case is supported."""
    import numpy as np

    a = np.array([[complex(x) for x in row] for row in mat], dtype=complex)
    vals, vecs = np.linalg.eig(a)
    cond = np.linalg.cond(vecs)
    if cond > 1e8:
        raise SymredError(
            "float-tier Jordan form only supports diagonalizable matrices; "
            "use the exact tier for defective ones"
        )
    p = [[Scalar.from_complex(complex(vecs[i, j])) for j in range(len(mat))] for i in range(len(mat))]
    pinv_np = np.linalg.inv(vecs)
    pinv = [[Scalar.from_complex(complex(pinv_np[i, j])) for j in range(len(mat))] for i in range(len(mat))]
    blocks = [(Scalar.from_complex(complex(v)), 1) for v in vals]
    return JordanData(p, pinv, blocks, exact=False)


# ---------------------------------------------------------------------------
# Principal elements


@dataclass
class PrincipalElement:
    """Either variant, with the cached preprincipal and hyperplane forms."""

    kind: str  # "ratio" | "log"
    C: tuple
    eigenvalue: Scalar | None
    preprincipal: Expr
    rho: Expr
    hyperplane: Expr

    def hyperplane_coefficients(self, m: int):
        """(coefficients on Z, constant) of the linear form q."""
        num, den = self.hyperplane.fraction()
        coeffs = []
        for j in range(m):
            coeffs.append(num.diff(j).constant_value() / den.constant_value())
        const = num.evaluate([_ZERO] * m) / den.evaluate([_ZERO] * m)
        return coeffs, const


def principal_element(d: AffineDerivation) -> PrincipalElement:
    """Deterministic principal element; ratio first, then eigen/log.

    Candidates are reduced-row-echelon basis vectors of the constraint
    space; the lexicographically smallest one (componentwise (re, im)
    order) wins, then it is rescaled to a primitive integer vector.
    """
    if d.is_zero():
        raise ValueError("the zero derivation has no principal element")
    m = d.m
    lt = [list(r) for r in d.linear]
    t = list(d.translation)

    # ratio: C in the left kernel of L with C.T != 0
    left_kernel = _linalg.nullspace(_linalg.transpose(lt), m)
    candidates = []
    for c in left_kernel:
        ct = _dot(c, t)
        if not ct.is_zero():
            candidates.append(c)
    if candidates:
        c = min(candidates, key=_linalg.vector_key)
        c = _linalg.primitive_vector(c)
        ct = _dot(c, t)
        nv = m
        q = Expr.from_poly(nv, _linear_poly(nv, c, _ZERO))
        rho = q / Expr.const(nv, ct)
        return PrincipalElement("ratio", tuple(c), None, q, rho, q)

    # log: eigenvectors of tL with nonzero eigenvalue
    eig = exact_eigenvalues(lt)
    if eig is None:
        raise NoPrincipalElement(
            "eigenvalues leave Q(i); no exact principal element is available"
        )
    lt_t = _linalg.transpose(lt)
    pool = []
    for lam in sorted(eig, key=Scalar.sort_key):
        if lam.is_zero():
            continue
        shifted = [
            [lt_t[i][j] - (lam if i == j else _ZERO) for j in range(m)] for i in range(m)
        ]
        for c in _linalg.nullspace(shifted, m):
            pool.append((lam, c))
    if not pool:
        raise NoPrincipalElement(
            "L has a trivial left kernel action on T and no nonzero eigenvalue"
        )
    lam, c = min(pool, key=lambda lc: (_linalg.vector_key(lc[1]), lc[0].sort_key()))
    c = _linalg.primitive_vector(c)
    shift = [x / lam for x in t]
    pre = Expr.from_poly(m, _linear_poly(m, c, _dot(c, shift)))
    rho = Expr.log(pre) / Expr.const(m, lam)
    q = pre - Expr.const(m, 1)
    return PrincipalElement("log", tuple(c), lam, pre, rho, q)


def _dot(a, b) -> Scalar:
    out = _ZERO
    for x, y in zip(a, b):
        out = out + x * y
    return out


def _linear_poly(nv: int, coeffs, const: Scalar) -> Poly:
    p = Poly.const(nv, const)
    for j, c in enumerate(coeffs):
        if not c.is_zero():
            p = p + Poly.var(nv, j).scale(c)
    return p


# ---------------------------------------------------------------------------
# Closed-form flows


@dataclass
class AffineFlow:
    """Psi(tau, W) = E(tau) W + v(tau) with exp-polynomial entries.

    Entries live over nvars = m + 1 variables (tau is the last index) with
    tau as the single exponential symbol.
    """

    derivation: AffineDerivation
    matrix: list
    offset: list

    @property
    def m(self) -> int:
        return self.derivation.m

    def eval_numeric(self, tau: complex):
        point = [0.0] * self.m + [tau]
        e = [[ep.evaluate(point) for ep in row] for row in self.matrix]
        v = [ep.evaluate(point) for ep in self.offset]
        return e, v

    def apply_numeric(self, tau: complex, w):
        e, v = self.eval_numeric(tau)
        return [sum(e[i][j] * w[j] for j in range(self.m)) + v[i] for i in range(self.m)]


def exp_flow(d: AffineDerivation, tau_name: str = "tau"):
    """Closed-form flow as expressions over Z plus the fresh tau symbol.

    Returns (exprs, flow): exprs[i] equals flow.matrix[i] . Z + flow.offset[i]
    rendered as an Expr with exp nodes; the structured flow supports exact
    identity checks and numeric evaluation.
    """
    flow = affine_flow(d)
    m = d.m
    nv = m + 1
    exprs = []
    for i in range(m):
        total = Expr.const(nv, 0)
        for j in range(m):
            ep = flow.matrix[i][j]
            if ep.is_zero():
                continue
            total = total + _exp_poly_to_expr(ep, nv) * Expr.var(nv, j)
        if not flow.offset[i].is_zero():
            total = total + _exp_poly_to_expr(flow.offset[i], nv)
        exprs.append(total)
    return exprs, flow


def _exp_poly_to_expr(ep: ExpPoly, nv: int) -> Expr:
    tau = Expr.var(nv, nv - 1)
    total = Expr.const(nv, 0)
    for key, poly in sorted(ep.terms.items(), key=lambda kv: kv[0][0].sort_key()):
        lam = key[0]
        part = Expr.from_poly(nv, poly)
        if not lam.is_zero():
            part = part * Expr.exp(Expr.const(nv, lam) * tau)
        total = total + part
    return total


def affine_flow(d: AffineDerivation) -> AffineFlow:
    m = d.m
    nv = m + 1
    tau_idx = m
    jd = jordan_form([list(r) for r in d.linear])
    expvars = (tau_idx,)

    def zero_ep():
        return ExpPoly.zero(nv, expvars)

    def tau_power(k: int, denom: int) -> Poly:
        e = [0] * nv
        e[tau_idx] = k
        return Poly(nv, {tuple(e): Scalar(Fraction(1, denom))})

    # exp(tau J) block by block
    n = m
    exp_j = [[zero_ep() for _ in range(n)] for _ in range(n)]
    int_j = [[zero_ep() for _ in range(n)] for _ in range(n)]  # integral_0^tau exp(uJ) du
    pos = 0
    fact = [1]
    for k in range(1, n + 2):
        fact.append(fact[-1] * k)
    for lam, size in jd.blocks:
        key = (lam,)
        for r in range(size):
            for c in range(r, size):
                k = c - r
                exp_j[pos + r][pos + c] = ExpPoly(nv, expvars, {key: tau_power(k, fact[k])})
        if lam.is_zero():
            for r in range(size):
                for c in range(r, size):
                    k = c - r
                    int_j[pos + r][pos + c] = ExpPoly.from_poly(tau_power(k + 1, fact[k + 1]), expvars)
        else:
            # J_b^{-1} (exp(tau J_b) - I) with exact triangular inverse
            jb_inv = _block_inverse(lam, size)
            em1 = [[exp_j[pos + r][pos + c] for c in range(size)] for r in range(size)]
            for r in range(size):
                em1[r][r] = em1[r][r] - ExpPoly.from_poly(Poly.one(nv), expvars)
            for r in range(size):
                for c in range(size):
                    acc = zero_ep()
                    for k in range(size):
                        if not jb_inv[r][k].is_zero():
                            acc = acc + em1[k][c].scale(jb_inv[r][k])
                    int_j[pos + r][pos + c] = acc
        pos += size

    p, pinv = jd.transform, jd.inverse
    e_mat = _sandwich(p, exp_j, pinv, nv, expvars)
    w = _linalg.matvec(pinv, list(d.translation))
    y = []
    for r in range(n):
        acc = zero_ep()
        for c in range(n):
            if not w[c].is_zero():
                acc = acc + int_j[r][c].scale(w[c])
        y.append(acc)
    offset = []
    for r in range(n):
        acc = zero_ep()
        for c in range(n):
            if not p[r][c].is_zero():
                acc = acc + y[c].scale(p[r][c])
        offset.append(acc)
    return AffineFlow(d, e_mat, offset)


def _block_inverse(lam: Scalar, size: int):
    """(lam I + N)^{-1} = sum_k (-1)^k N^k / lam^{k+1}, exactly."""
    out = _linalg.zeros(size, size)
    for r in range(size):
        for c in range(r, size):
            k = c - r
            out[r][c] = Scalar(-1 if k % 2 else 1) / lam ** (k + 1)
    return out


def _sandwich(p, middle, pinv, nv, expvars):
    n = len(p)
    tmp = [[ExpPoly.zero(nv, expvars) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = ExpPoly.zero(nv, expvars)
            for k in range(n):
                if not p[i][k].is_zero() and not middle[k][j].is_zero():
                    acc = acc + middle[k][j].scale(p[i][k])
            tmp[i][j] = acc
    out = [[ExpPoly.zero(nv, expvars) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = ExpPoly.zero(nv, expvars)
            for k in range(n):
                if not pinv[k][j].is_zero() and not tmp[i][k].is_zero():
                    acc = acc + tmp[i][k].scale(pinv[k][j])
            out[i][j] = acc
    return out


# ---------------------------------------------------------------------------
# Exact flow identities (used by the property suites)


def flow_satisfies_ode(flow: AffineFlow) -> bool:
    """d/dtau E = L E and d/dtau v = L v + T, exactly."""
    m = flow.m
    tau = m
    lmat = flow.derivation.linear
    for i in range(m):
        for j in range(m):
            lhs = flow.matrix[i][j].diff(tau)
            rhs = ExpPoly.zero(m + 1, (tau,))
            for k in range(m):
                if not lmat[i][k].is_zero():
                    rhs = rhs + flow.matrix[k][j].scale(lmat[i][k])
            if lhs != rhs:
                return False
    for i in range(m):
        lhs = flow.offset[i].diff(tau)
        rhs = ExpPoly.from_poly(Poly.const(m + 1, flow.derivation.translation[i]), (tau,))
        for k in range(m):
            if not lmat[i][k].is_zero():
                rhs = rhs + flow.offset[k].scale(lmat[i][k])
        if lhs != rhs:
            return False
    return True


def _lift_two_symbols(ep: ExpPoly, m: int, which: int) -> ExpPoly:
    """Embed a one-tau exp-polynomial into the (tau1, tau2) space.

    which = 0 reads the entry at tau1, which = 1 at tau2, and which = 2
    at tau1 + tau2.
    """
    nv2 = m + 2
    t1, t2 = m, m + 1
    out = ExpPoly.zero(nv2, (t1, t2))
    for (lam,), poly in ep.terms.items():
        if which == 0:
            p2 = poly.pad(nv2)
            key = (lam, _ZERO)
        elif which == 1:
            terms = {}
            for e, c in poly.terms.items():
                e2 = list(e) + [0]
                e2[t2] = e2[t1]
                e2[t1] = 0
                terms[tuple(e2)] = c
            p2 = Poly(nv2, terms)
            key = (_ZERO, lam)
        else:
            p2 = poly.pad(nv2).substitute({t1: Poly.var(nv2, t1) + Poly.var(nv2, t2)})
            key = (lam, lam)
        piece = ExpPoly(nv2, (t1, t2), {key: p2})
        out = out + piece
    return out


def flow_group_law(flow: AffineFlow) -> bool:
    """Psi(tau1, Psi(tau2, W)) = Psi(tau1 + tau2, W), exactly."""
    m = flow.m
    e1 = [[_lift_two_symbols(ep, m, 0) for ep in row] for row in flow.matrix]
    e2 = [[_lift_two_symbols(ep, m, 1) for ep in row] for row in flow.matrix]
    e12 = [[_lift_two_symbols(ep, m, 2) for ep in row] for row in flow.matrix]
    v1 = [_lift_two_symbols(ep, m, 0) for ep in flow.offset]
    v2 = [_lift_two_symbols(ep, m, 1) for ep in flow.offset]
    v12 = [_lift_two_symbols(ep, m, 2) for ep in flow.offset]
    for i in range(m):
        for j in range(m):
            acc = ExpPoly.zero(m + 2, (m, m + 1))
            for k in range(m):
                acc = acc + e1[i][k] * e2[k][j]
            if acc != e12[i][j]:
                return False
    for i in range(m):
        acc = v1[i]
        for k in range(m):
            acc = acc + e1[i][k] * v2[k]
        if acc != v12[i]:
            return False
    return True
