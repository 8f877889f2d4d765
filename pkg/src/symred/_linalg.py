"""Exact dense linear algebra over Scalar (Q(i) tier).

Plain fraction Gaussian elimination for reduced row echelon forms and
nullspaces, and one-step fraction-free (Bareiss) elimination over Gaussian
integers for rank queries, which keeps intermediate entries integral.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

from ._scalar import Scalar

_ZERO = Scalar.zero()
_ONE = Scalar.one()


def identity(n: int):
    return [[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)]


def zeros(r: int, c: int):
    return [[_ZERO for _ in range(c)] for _ in range(r)]


def transpose(a):
    return [list(col) for col in zip(*a)]


def matmul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    out = zeros(rows, cols)
    for i in range(rows):
        ai = a[i]
        oi = out[i]
        for k in range(inner):
            s = ai[k]
            if s.is_zero():
                continue
            bk = b[k]
            for j in range(cols):
                if not bk[j].is_zero():
                    oi[j] = oi[j] + s * bk[j]
    return out

def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matvec(a, v):
    out = []
    for row in a:
        s = _ZERO
        for x, y in zip(row, v):
            if not x.is_zero() and not y.is_zero():
                s = s + x * y
        out.append(s)
    return out


def rref(rows):
    """Reduced row echelon form; returns (new matrix, pivot column list)."""
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        p = None
        for i in range(r, nrows):
            if not m[i][c].is_zero():
                p = i
                break
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = _ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def rank(rows) -> int:
    if not rows:
        return 0
    return rank_bareiss(rows)


# -- fraction-free rank over Gaussian integers ---------------------------

def _to_gaussian_int_rows(rows):
    out = []
    for row in rows:
        den = 1
        for s in row:
            if not s.exact:
                raise ValueError("Bareiss rank needs exact entries")
            den = lcm(den, s.re.denominator, s.im.denominator)
        out.append([(int(s.re * den), int(s.im * den)) for s in row])
    return out


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gsub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _gdiv(a, b):
    n = b[0] * b[0] + b[1] * b[1]
    re, rem1 = divmod(a[0] * b[0] + a[1] * b[1], n)
    im, rem2 = divmod(a[1] * b[0] - a[0] * b[1], n)
    if rem1 or rem2:
        raise ArithmeticError("inexact Gaussian integer division in Bareiss step")
    return (re, im)


def rank_bareiss(rows) -> int:
    m = _to_gaussian_int_rows(rows)
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    prev = (1, 0)
    r = 0
    for c in range(ncols):
        p = None
        for i in range(r, nrows):
            if m[i][c] != (0, 0):
                p = i
                break
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, nrows):
            mic = m[i][c]
            for j in range(c + 1, ncols):
                m[i][j] = _gdiv(_gsub(_gmul(piv, m[i][j]), _gmul(mic, m[r][j])), prev)
            m[i][c] = (0, 0)
        prev = piv
        r += 1
        if r == nrows:
            break
    return r


class IncrementalRref:
    """Row-at-a-time exact reduction; rank and nullspace match full RREF.

    RREF of a matrix is unique, so feeding rows in any order yields the
    same reduced rows and therefore the same deterministic kernel basis.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows = []
        self.pivots = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    @staticmethod
    def _axpy(row, f, other):
        return [x if y.is_zero() else x - f * y for x, y in zip(row, other)]

    def add(self, row) -> bool:
        """Reduce a row into the structure; True when the rank grew."""
        row = list(row)
        for r, pc in zip(self.rows, self.pivots):
            f = row[pc]
            if not f.is_zero():
                row = self._axpy(row, f, r)
        pc = next((c for c, x in enumerate(row) if not x.is_zero()), None)
        if pc is None:
            return False
        inv = _ONE / row[pc]
        row = [x if x.is_zero() else x * inv for x in row]
        for i, r in enumerate(self.rows):
            f = r[pc]
            if not f.is_zero():
                self.rows[i] = self._axpy(r, f, row)
        self.rows.append(row)
        self.pivots.append(pc)
        return True

    def nullspace(self):
        order = sorted(range(len(self.rows)), key=lambda i: self.pivots[i])
        rows = [self.rows[i] for i in order]
        pivots = [self.pivots[i] for i in order]
        pivot_set = set(pivots)
        basis = []
        for free in range(self.ncols):
            if free in pivot_set:
                continue
            v = [_ZERO] * self.ncols
            v[free] = _ONE
            for r, pc in zip(rows, pivots):
                v[pc] = -r[free]
            basis.append(v)
        return basis


def nullspace(rows, ncols: int):
    """Deterministic right-kernel basis (one vector per free column)."""
    if not rows:
        return [[_ONE if j == k else _ZERO for j in range(ncols)] for k in range(ncols)]
    red, pivots = rref(rows)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [_ZERO] * ncols
        v[free] = _ONE
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][free]
        basis.append(v)
    return basis


def solve(a, b):
    """One exact solution of a x = b, or None when inconsistent."""
    aug = [list(row) + [bv] for row, bv in zip(a, b)]
    red, pivots = rref(aug)
    ncols = len(a[0]) if a else 0
    for r, pc in enumerate(pivots):
        if pc == ncols:
            return None
    x = [_ZERO] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][ncols]
    return x


def inverse(a):
    n = len(a)
    aug = [list(row) + identity(n)[i] for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in red]


def vector_key(v):
    """Total order key on exact vectors: componentwise (re, im)."""
    return tuple(s.sort_key() for s in v)


def is_multiple(v, w) -> bool:
    """True when w = c*v or v = w = 0 (exact vectors)."""
    c = None
    for x, y in zip(v, w):
        if x.is_zero():
            if not y.is_zero():
                return False
            continue
        r = y / x
        if c is None:
            c = r
        elif not (c - r).is_zero():
            return False
    if c is None:
        return all(y.is_zero() for y in w)
    return True


def primitive_vector(v):
    """Scale an exact vector to Gaussian-integer entries with content 1.

    The leading nonzero entry is normalized by a unit so its real part is
    positive, or zero with positive imaginary part.
    """
    den = 1
    for s in v:
        den = lcm(den, s.re.denominator, s.im.denominator)
    num = 0
    for s in v:
        num = gcd(num, abs(int(s.re * den)), abs(int(s.im * den)))
    if num == 0:
        return list(v)
    factor = Scalar(Fraction(den, num))
    out = [s * factor for s in v]
    lead = next(s for s in out if not s.is_zero())
    for unit in (_ONE, -_ONE, Scalar(0, -1), Scalar(0, 1)):
        u = lead * unit
        if u.re > 0 or (u.re == 0 and u.im > 0):
            return [s * unit for s in out]
    return out


def in_span(basis, v) -> bool:
    """Exact membership of v in the row span of basis."""
    if not basis:
        return all(x.is_zero() for x in v)
    return rank(list(basis)) == rank(list(basis) + [list(v)])
