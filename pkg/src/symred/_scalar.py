"""Exact Gaussian-rational scalars with a complex-double fallback tier.

The exact tier works in Q(i): a pair of arbitrary-precision rationals.
Every paper-scale eigenvalue lives there.  Any operation that touches an
approximate value stays approximate; exact arithmetic never rounds.
"""

from __future__ import annotations

from fractions import Fraction


class Scalar:
    """A field element, either exact (re + im*i over Q) or a complex double."""

    __slots__ = ("re", "im", "exact")

    def __init__(self, re=0, im=0, exact: bool = True):
        if exact:
            self.re = re if isinstance(re, Fraction) else Fraction(re)
            self.im = im if isinstance(im, Fraction) else Fraction(im)
        else:
            self.re = float(re)
            self.im = float(im)
        self.exact = exact

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero() -> "Scalar":
        return _ZERO

    @staticmethod
    def one() -> "Scalar":
        return _ONE

    @staticmethod
    def i() -> "Scalar":
        return _I

    @staticmethod
    def from_complex(z: complex) -> "Scalar":
        return Scalar(z.real, z.imag, exact=False)

    @staticmethod
    def rational(p, q=1) -> "Scalar":
        return Scalar(Fraction(p, q))

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_one(self) -> bool:
        return self.re == 1 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def is_integer(self) -> bool:
        return (
            self.exact and self.im == 0 and self.re.denominator == 1
        )

    # -- arithmetic ---------------------------------------------------
    @staticmethod
    def _coerce(x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return Scalar(x)
        if isinstance(x, float):
            return Scalar(x, 0.0, exact=False)
        if isinstance(x, complex):
            return Scalar(x.real, x.imag, exact=False)
        raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")

    def _pair(self, other):
        other = Scalar._coerce(other)
        if self.exact and other.exact:
            return self, other, True
        a = self if not self.exact else Scalar(float(self.re), float(self.im), exact=False)
        b = other if not other.exact else Scalar(float(other.re), float(other.im), exact=False)
        return a, b, False

    def __add__(self, other):
        if type(other) is Scalar and self.exact and other.exact:
            return Scalar(self.re + other.re, self.im + other.im)
        a, b, exact = self._pair(other)
        return Scalar(a.re + b.re, a.im + b.im, exact)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is Scalar and self.exact and other.exact:
            return Scalar(self.re - other.re, self.im - other.im)
        a, b, exact = self._pair(other)
        return Scalar(a.re - b.re, a.im - b.im, exact)

    def __rsub__(self, other):
        return Scalar._coerce(other) - self

    def __mul__(self, other):
        if type(other) is Scalar and self.exact and other.exact:
            if self.im == 0 and other.im == 0:
                return Scalar(self.re * other.re)
            return Scalar(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        a, b, exact = self._pair(other)
        return Scalar(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re, exact)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if type(other) is Scalar and self.exact and other.exact and self.im == 0 and other.im == 0:
            if other.re == 0:
                raise ZeroDivisionError("scalar division by zero")
            return Scalar(self.re / other.re)
        a, b, exact = self._pair(other)
        n = b.re * b.re + b.im * b.im
        if n == 0:
            raise ZeroDivisionError("scalar division by zero")
        return Scalar((a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n, exact)

    def __rtruediv__(self, other):
        return Scalar._coerce(other) / self

    def __neg__(self):
        return Scalar(-self.re, -self.im, self.exact)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("scalar powers must be integers")
        if k < 0:
            return _ONE / self ** (-k)
        out = _ONE if self.exact else Scalar(1.0, 0.0, exact=False)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "Scalar":
        return Scalar(self.re, -self.im, self.exact)

    # -- comparisons / hashing ----------------------------------------
    def __eq__(self, other):
        if not isinstance(other, (Scalar, int, Fraction, float, complex)):
            return NotImplemented
        other = Scalar._coerce(other)
        if self.exact and other.exact:
            return self.re == other.re and self.im == other.im
        return complex(self) == complex(other)

    def __hash__(self):
        if self.exact:
            return hash((self.re, self.im))
        return hash(complex(self))

    def sort_key(self):
        """Deterministic total order on exact scalars (re first, then im)."""
        return (Fraction(self.re), Fraction(self.im))

    # -- conversions ---------------------------------------------------
    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __abs__(self) -> float:
        return abs(complex(self))

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if not self.exact:
            return str(complex(self))
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        istr = "i" if mag == 1 else f"{mag}*i"
        return f"{self.re}{sign}{istr}"


_ZERO = Scalar(0)
_ONE = Scalar(1)
_I = Scalar(0, 1)
