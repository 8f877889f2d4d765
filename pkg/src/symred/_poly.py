"""Expanded multivariate polynomials over Scalar, and an exponential extension.

Poly is a dict from exponent tuples to nonzero scalars with a graded
lexicographic term order (on the variable index order).  ExpPoly adjoins
factors e^{lambda * v} for designated variables v; sums of p(v)*e^{lambda v}
with distinct lambda are linearly independent, so equality is decidable
coefficient-wise.  That is all the flow identities need.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from ._scalar import Scalar

_ZERO = Scalar.zero()
_ONE = Scalar.one()


class Poly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        self.terms = terms if terms is not None else {}

    # -- constructors ---------------------------------------------------
    @staticmethod
    def const(nvars: int, c: Scalar) -> "Poly":
        if c.is_zero():
            return Poly(nvars)
        return Poly(nvars, {(0,) * nvars: c})

    @staticmethod
    def var(nvars: int, j: int) -> "Poly":
        e = [0] * nvars
        e[j] = 1
        return Poly(nvars, {tuple(e): _ONE})

    @staticmethod
    def zero(nvars: int) -> "Poly":
        return Poly(nvars)

    @staticmethod
    def one(nvars: int) -> "Poly":
        return Poly.const(nvars, _ONE)

    def copy(self) -> "Poly":
        return Poly(self.nvars, dict(self.terms))

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(x == 0 for x in e) for e in self.terms)

    def constant_value(self) -> Scalar:
        if self.is_zero():
            return _ZERO
        return self.terms[(0,) * self.nvars]

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def variables(self) -> set:
        out = set()
        for e in self.terms:
            for j, k in enumerate(e):
                if k:
                    out.add(j)
        return out

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        if self.nvars != other.nvars:
            raise ValueError("polynomial variable counts differ")
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s.is_zero():
                    del out[e]
                else:
                    out[e] = s
        return Poly(self.nvars, out)

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.nvars != other.nvars:
            raise ValueError("polynomial variable counts differ")
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                s = out.get(e)
                if s is None:
                    out[e] = c
                else:
                    s = s + c
                    if s.is_zero():
                        del out[e]
                    else:
                        out[e] = s
        return Poly(self.nvars, out)

    def scale(self, c: Scalar) -> "Poly":
        if c.is_zero():
            return Poly(self.nvars)
        return Poly(self.nvars, {e: v * c for e, v in self.terms.items()})

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power on a polynomial")
        out = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def diff(self, j: int) -> "Poly":
        out: dict = {}
        for e, c in self.terms.items():
            k = e[j]
            if k == 0:
                continue
            e2 = list(e)
            e2[j] = k - 1
            e2 = tuple(e2)
            v = c * k
            s = out.get(e2)
            out[e2] = v if s is None else s + v
        return Poly(self.nvars, {e: c for e, c in out.items() if not c.is_zero()})

    def evaluate(self, point) -> Scalar:
        total = _ZERO
        for e, c in self.terms.items():
            v = c
            for j, k in enumerate(e):
                if k:
                    v = v * point[j] ** k
            total = total + v
        return total

    def substitute(self, values: dict) -> "Poly":
        """Substitute Poly values (same nvars) for the given variables."""
        out = Poly.zero(self.nvars)
        for e, c in self.terms.items():
            term = Poly.const(self.nvars, c)
            rest = [0] * self.nvars
            for j, k in enumerate(e):
                if not k:
                    continue
                if j in values:
                    term = term * values[j] ** k
                else:
                    rest[j] = k
            if any(rest):
                term = term * Poly(self.nvars, {tuple(rest): _ONE})
            out = out + term
        return out

    # -- ordering, equality -----------------------------------------------
    @staticmethod
    def _grlex_key(e):
        return (sum(e), e)

    def sorted_terms(self, reverse: bool = True):
        return sorted(self.terms.items(), key=lambda t: Poly._grlex_key(t[0]), reverse=reverse)

    def leading(self):
        """Leading (exponent, coeff) in graded lexicographic order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=Poly._grlex_key)
        return e, self.terms[e]

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Poly({self.nvars}, {len(self.terms)} terms)"

    # -- variable-space embedding ------------------------------------------
    def pad(self, nvars: int) -> "Poly":
        if nvars < self.nvars:
            raise ValueError("cannot shrink variable space by padding")
        extra = (0,) * (nvars - self.nvars)
        return Poly(nvars, {e + extra: c for e, c in self.terms.items()})

    def project(self, nvars: int) -> "Poly":
        """Drop trailing variables, which must not occur."""
        out = {}
        for e, c in self.terms.items():
            if any(e[nvars:]):
                raise ValueError("polynomial involves dropped variables")
            out[e[:nvars]] = c
        return Poly(nvars, out)


def exact_divide(num: Poly, den: Poly):
    """Exact multivariate division num/den; None when not divisible."""
    if den.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if num.is_zero():
        return Poly.zero(num.nvars)
    q = Poly.zero(num.nvars)
    r = num
    de, dc = den.leading()
    while not r.is_zero():
        re_, rc = r.leading()
        e = tuple(a - b for a, b in zip(re_, de))
        if any(x < 0 for x in e):
            return None
        t = Poly(num.nvars, {e: rc / dc})
        q = q + t
        r = r - t * den
    return q


def monomial_gcd(p: Poly):
    """Componentwise minimum exponent over all terms."""
    it = iter(p.terms)
    g = list(next(it))
    for e in it:
        for j, k in enumerate(e):
            if k < g[j]:
                g[j] = k
    return tuple(g)


def divide_by_monomial(p: Poly, mono) -> Poly:
    if not any(mono):
        return p
    return Poly(p.nvars, {tuple(a - b for a, b in zip(e, mono)): c for e, c in p.terms.items()})


def rational_content(p: Poly) -> Fraction:
    """Positive rational c with p/c integral and primitive (real-rational polys)."""
    num_gcd = 0
    den_lcm = 1
    for c in p.terms.values():
        for part in (c.re, c.im):
            f = Fraction(part)
            if f:
                num_gcd = gcd(num_gcd, abs(f.numerator))
                den_lcm = den_lcm * f.denominator // gcd(den_lcm, f.denominator)
    if num_gcd == 0:
        return Fraction(1)
    return Fraction(num_gcd, den_lcm)


class ExpPoly:
    """Sum over keys (lambda_1..lambda_k) of poly * exp(sum lambda_j * v_j).

    expvars lists the variable indices that appear in the exponentials; the
    polynomial parts may also involve them (Jordan blocks produce tau^k terms).
    """

    __slots__ = ("nvars", "expvars", "terms")

    def __init__(self, nvars: int, expvars: tuple, terms: dict | None = None):
        self.nvars = nvars
        self.expvars = tuple(expvars)
        self.terms = terms if terms is not None else {}

    @staticmethod
    def from_poly(p: Poly, expvars: tuple) -> "ExpPoly":
        key = (_ZERO,) * len(expvars)
        if p.is_zero():
            return ExpPoly(p.nvars, expvars)
        return ExpPoly(p.nvars, expvars, {key: p})

    @staticmethod
    def zero(nvars: int, expvars: tuple) -> "ExpPoly":
        return ExpPoly(nvars, expvars)

    def _check(self, other: "ExpPoly"):
        if self.nvars != other.nvars or self.expvars != other.expvars:
            raise ValueError("exponential polynomial spaces differ")

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.terms.values())

    def _store(self, out: dict, key, p: Poly):
        cur = out.get(key)
        p = p if cur is None else cur + p
        if p.is_zero():
            out.pop(key, None)
        else:
            out[key] = p

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        self._check(other)
        out = dict(self.terms)
        for key, p in other.terms.items():
            self._store(out, key, p)
        return ExpPoly(self.nvars, self.expvars, out)

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(self.nvars, self.expvars, {k: -p for k, p in self.terms.items()})

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        self._check(other)
        out: dict = {}
        for k1, p1 in self.terms.items():
            for k2, p2 in other.terms.items():
                key = tuple(a + b for a, b in zip(k1, k2))
                self._store(out, key, p1 * p2)
        return ExpPoly(self.nvars, self.expvars, out)

    def scale(self, c: Scalar) -> "ExpPoly":
        if c.is_zero():
            return ExpPoly(self.nvars, self.expvars)
        return ExpPoly(self.nvars, self.expvars, {k: p.scale(c) for k, p in self.terms.items()})

    def diff(self, j: int) -> "ExpPoly":
        out: dict = {}
        try:
            pos = self.expvars.index(j)
        except ValueError:
            pos = None
        for key, p in self.terms.items():
            d = p.diff(j)
            if pos is not None and not key[pos].is_zero():
                d = d + p.scale(key[pos])
            if not d.is_zero():
                self._store(out, key, d)
        return ExpPoly(self.nvars, self.expvars, out)

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            return NotImplemented
        self._check(other)
        keys = set(self.terms) | set(other.terms)
        z = Poly.zero(self.nvars)
        return all(self.terms.get(k, z) == other.terms.get(k, z) for k in keys)

    def __hash__(self):  # pragma: no cover - dict key use is not needed
        return hash((self.nvars, self.expvars, frozenset(self.terms)))

    def evaluate(self, point) -> complex:
        """Numeric value with complex arithmetic; point covers all nvars."""
        import cmath

        total = 0j
        for key, p in self.terms.items():
            arg = 0j
            for lam, j in zip(key, self.expvars):
                arg += complex(lam) * complex(point[j])
            total += complex(p.evaluate([Scalar._coerce(x) for x in point])) * cmath.exp(arg)
        return total

    def substitute_poly(self, values: dict) -> "ExpPoly":
        """Substitute polynomials for non-exponential variables only."""
        for j in values:
            if j in self.expvars:
                raise ValueError("cannot substitute an exponential variable")
        out: dict = {}
        for key, p in self.terms.items():
            self._store(out, key, p.substitute(values))
        return ExpPoly(self.nvars, self.expvars, out)
