"""Expression trees, exact calculus and the input DSL.

Expressions are exact rational functions of the expanded variable set
Z = (t, states, params), with optional log/exp nodes that only ever appear
in reducer and flow outputs, never in parsed input.  Equality of log/exp
free expressions is decided through a cached canonical fraction of expanded
polynomials (cross-multiplied identity).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

from ._poly import Poly, divide_by_monomial, exact_divide, monomial_gcd
from ._scalar import Scalar

_ZERO = Scalar.zero()
_ONE = Scalar.one()
_UNSET = object()


class SymredError(Exception):
    """Base error for the package."""


class ParseError(SymredError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + where)


class PoleError(SymredError):
    """A denominator evaluated to zero; callers typically resample."""


class ZeroDenominator(SymredError):
    """An expression has an identically zero denominator."""


# ---------------------------------------------------------------------------
# Expressions


class Expr:
    """Immutable expression node over a fixed variable count.

    kind is one of: const, var, add, mul, pow, div, log, exp, frac.
    A "frac" node holds an already-canonical (num, den) polynomial pair.
    """

    __slots__ = ("kind", "args", "nvars", "_frac")

    def __init__(self, kind: str, args, nvars: int):
        self.kind = kind
        self.args = args
        self.nvars = nvars
        self._frac = _UNSET

    # -- constructors ---------------------------------------------------
    @staticmethod
    def const(nvars: int, c) -> "Expr":
        return Expr("const", Scalar._coerce(c), nvars)

    @staticmethod
    def var(nvars: int, j: int) -> "Expr":
        if not 0 <= j < nvars:
            raise ValueError(f"variable index {j} out of range for {nvars} variables")
        return Expr("var", j, nvars)

    @staticmethod
    def from_fraction(nvars: int, num: Poly, den: Poly) -> "Expr":
        num, den = _normalize_fraction(num, den)
        e = Expr("frac", (num, den), nvars)
        e._frac = (num, den)
        return e

    @staticmethod
    def from_poly(nvars: int, p: Poly) -> "Expr":
        return Expr.from_fraction(nvars, p, Poly.one(nvars))

    def _same(self, other: "Expr"):
        if self.nvars != other.nvars:
            raise ValueError("expressions live over different variable sets")

    def _is_const_zero(self) -> bool:
        if self.kind == "const":
            return self.args.is_zero()
        if self.kind == "frac":
            return self.args[0].is_zero()
        return False

    def _is_const_one(self) -> bool:
        if self.kind == "const":
            return self.args.is_one()
        if self.kind == "frac":
            num, den = self.args
            return num.is_constant() and den.is_constant() and (
                num.constant_value() - den.constant_value()
            ).is_zero() and not num.is_zero()
        return False

    # -- operators --------------------------------------------------------
    # Trivial constants fold at construction so that zero factors cannot
    # smuggle log/exp nodes past the canonical-fraction machinery.
    def __add__(self, other):
        other = _as_expr(self.nvars, other)
        self._same(other)
        if self._is_const_zero():
            return other
        if other._is_const_zero():
            return self
        return Expr("add", (self, other), self.nvars)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_expr(self.nvars, other))

    def __rsub__(self, other):
        return _as_expr(self.nvars, other) - self

    def __mul__(self, other):
        other = _as_expr(self.nvars, other)
        self._same(other)
        if self._is_const_zero() or other._is_const_zero():
            return Expr.const(self.nvars, 0)
        if self._is_const_one():
            return other
        if other._is_const_one():
            return self
        return Expr("mul", (self, other), self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_expr(self.nvars, other)
        self._same(other)
        return Expr("div", (self, other), self.nvars)

    def __rtruediv__(self, other):
        return _as_expr(self.nvars, other) / self

    def __neg__(self):
        return Expr("mul", (Expr.const(self.nvars, -1), self), self.nvars)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("exponents must be integers")
        return Expr("pow", (self, k), self.nvars)

    @staticmethod
    def log(arg: "Expr") -> "Expr":
        return Expr("log", arg, arg.nvars)

    @staticmethod
    def exp(arg: "Expr") -> "Expr":
        return Expr("exp", arg, arg.nvars)

    # -- canonical form -----------------------------------------------------
    def fraction(self):
        """Canonical (num, den) polynomial pair, or None for log/exp nodes."""
        if self._frac is _UNSET:
            self._frac = _fraction_of(self)
        return self._frac

    def is_rational(self) -> bool:
        return self.fraction() is not None

    def is_zero(self) -> bool:
        f = self.fraction()
        if f is None:
            raise ValueError("zero test needs a log/exp-free expression")
        return f[0].is_zero()

    def constant_value(self) -> Scalar:
        f = self.fraction()
        if f is None or not f[0].is_constant() or not f[1].is_constant():
            raise ValueError("expression is not a constant")
        return f[0].constant_value() / f[1].constant_value()

    def variables(self) -> set:
        f = self.fraction()
        if f is not None:
            return f[0].variables() | f[1].variables()
        return _tree_variables(self)

    def __repr__(self):
        names = [f"z{j}" for j in range(self.nvars)]
        return f"Expr({print_expr(self, names)})"


def _as_expr(nvars: int, x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Expr.const(nvars, x)


def _tree_variables(e: Expr) -> set:
    if e.kind == "const":
        return set()
    if e.kind == "var":
        return {e.args}
    if e.kind == "frac":
        return e.args[0].variables() | e.args[1].variables()
    if e.kind in ("log", "exp"):
        return _tree_variables(e.args)
    if e.kind == "pow":
        return _tree_variables(e.args[0])
    return set().union(*(_tree_variables(a) for a in e.args))


def _normalize_fraction(num: Poly, den: Poly):
    if den.is_zero():
        raise ZeroDenominator("expression has an identically zero denominator")
    if num.is_zero():
        return Poly.zero(num.nvars), Poly.one(num.nvars)
    gn = monomial_gcd(num)
    gd = monomial_gcd(den)
    g = tuple(min(a, b) for a, b in zip(gn, gd))
    if any(g):
        num = divide_by_monomial(num, g)
        den = divide_by_monomial(den, g)
    if not den.is_constant():
        q = exact_divide(num, den)
        if q is not None:
            num, den = q, Poly.one(num.nvars)
    _, lc = den.leading()
    if not lc.is_one():
        inv = _ONE / lc
        num = num.scale(inv)
        den = den.scale(inv)
    return num, den


def _fraction_of(e: Expr):
    if e.kind == "frac":
        return e.args
    if e.kind == "const":
        return Poly.const(e.nvars, e.args), Poly.one(e.nvars)
    if e.kind == "var":
        return Poly.var(e.nvars, e.args), Poly.one(e.nvars)
    if e.kind in ("log", "exp"):
        return None
    if e.kind == "add":
        n1d1 = e.args[0].fraction()
        n2d2 = e.args[1].fraction()
        if n1d1 is None or n2d2 is None:
            return None
        n1, d1 = n1d1
        n2, d2 = n2d2
        return _normalize_fraction(n1 * d2 + n2 * d1, d1 * d2)
    if e.kind == "mul":
        n1d1 = e.args[0].fraction()
        n2d2 = e.args[1].fraction()
        if n1d1 is None or n2d2 is None:
            return None
        return _normalize_fraction(n1d1[0] * n2d2[0], n1d1[1] * n2d2[1])
    if e.kind == "div":
        n1d1 = e.args[0].fraction()
        n2d2 = e.args[1].fraction()
        if n1d1 is None or n2d2 is None:
            return None
        return _normalize_fraction(n1d1[0] * n2d2[1], n1d1[1] * n2d2[0])
    if e.kind == "pow":
        base, k = e.args
        f = base.fraction()
        if f is None:
            return None
        n, d = f
        if k >= 0:
            return _normalize_fraction(n**k, d**k)
        return _normalize_fraction(d ** (-k), n ** (-k))
    raise ValueError(f"unknown expression kind {e.kind!r}")


def equivalent(e1: Expr, e2: Expr) -> bool:
    """Exact equality of log/exp-free expressions (cross-multiplied)."""
    f1, f2 = e1.fraction(), e2.fraction()
    if f1 is None or f2 is None:
        raise ValueError("equality is only decidable for log/exp-free expressions")
    return f1[0] * f2[1] == f2[0] * f1[1]


# ---------------------------------------------------------------------------
# Calculus primitives


def differentiate(e: Expr, v: int) -> Expr:
    """Canonical partial derivative; log nodes follow d log u = du/u."""
    f = e.fraction()
    if f is not None:
        n, d = f
        if d.is_constant():
            return Expr.from_fraction(e.nvars, n.diff(v), d)
        num = n.diff(v) * d - n * d.diff(v)
        return Expr.from_fraction(e.nvars, num, d * d)
    return _diff_tree(e, v)


def _diff_tree(e: Expr, v: int) -> Expr:
    nv = e.nvars
    if e.kind == "const":
        return Expr.const(nv, 0)
    if e.kind == "var":
        return Expr.const(nv, 1 if e.args == v else 0)
    if e.kind == "add":
        return differentiate(e.args[0], v) + differentiate(e.args[1], v)
    if e.kind == "mul":
        a, b = e.args
        return differentiate(a, v) * b + a * differentiate(b, v)
    if e.kind == "div":
        a, b = e.args
        return (differentiate(a, v) * b - a * differentiate(b, v)) / (b * b)
    if e.kind == "pow":
        base, k = e.args
        if k == 0:
            return Expr.const(nv, 0)
        return Expr.const(nv, k) * base ** (k - 1) * differentiate(base, v)
    if e.kind == "log":
        return differentiate(e.args, v) / e.args
    if e.kind == "exp":
        return e * differentiate(e.args, v)
    if e.kind == "frac":
        n, d = e.args
        num = n.diff(v) * d - n * d.diff(v)
        return Expr.from_fraction(nv, num, d * d)
    raise ValueError(f"unknown expression kind {e.kind!r}")


def substitute(e: Expr, bindings: dict) -> Expr:
    """Simultaneous substitution of expressions for variables.

    The result is canonicalized so an identically zero denominator is
    reported immediately.
    """
    out = _subst_tree(e, bindings)
    out.fraction()
    return out


def _poly_subst(nvars: int, p: Poly, bindings: dict) -> Expr:
    total = Expr.const(nvars, 0)
    for mono, c in p.sorted_terms():
        term = Expr.const(nvars, c)
        for j, k in enumerate(mono):
            if not k:
                continue
            base = bindings.get(j)
            if base is None:
                base = Expr.var(nvars, j)
            term = term * base**k
        total = total + term
    return total


def _subst_tree(e: Expr, bindings: dict) -> Expr:
    nv = e.nvars
    if e.kind == "const":
        return e
    if e.kind == "var":
        return bindings.get(e.args, e)
    if e.kind == "frac":
        n, d = e.args
        return _poly_subst(nv, n, bindings) / _poly_subst(nv, d, bindings)
    if e.kind in ("add", "mul", "div"):
        a = _subst_tree(e.args[0], bindings)
        b = _subst_tree(e.args[1], bindings)
        return Expr(e.kind, (a, b), nv)
    if e.kind == "pow":
        return Expr("pow", (_subst_tree(e.args[0], bindings), e.args[1]), nv)
    if e.kind in ("log", "exp"):
        return Expr(e.kind, _subst_tree(e.args, bindings), nv)
    raise ValueError(f"unknown expression kind {e.kind!r}")


def evaluate(e: Expr, point) -> Scalar:
    """Value at a point; exact when everything in sight is exact."""
    point = [Scalar._coerce(x) for x in point]
    f = e.fraction()
    if f is not None:
        n, d = f
        dv = d.evaluate(point)
        if dv.is_zero():
            raise PoleError("denominator vanishes at the evaluation point")
        return n.evaluate(point) / dv
    return _eval_tree(e, point)


def _eval_tree(e: Expr, point) -> Scalar:
    if e.kind == "const":
        return e.args
    if e.kind == "var":
        return point[e.args]
    if e.kind == "frac":
        n, d = e.args
        dv = d.evaluate(point)
        if dv.is_zero():
            raise PoleError("denominator vanishes at the evaluation point")
        return n.evaluate(point) / dv
    if e.kind == "add":
        return _eval_tree(e.args[0], point) + _eval_tree(e.args[1], point)
    if e.kind == "mul":
        return _eval_tree(e.args[0], point) * _eval_tree(e.args[1], point)
    if e.kind == "div":
        d = _eval_tree(e.args[1], point)
        if d.is_zero():
            raise PoleError("denominator vanishes at the evaluation point")
        return _eval_tree(e.args[0], point) / d
    if e.kind == "pow":
        base = _eval_tree(e.args[0], point)
        k = e.args[1]
        if k < 0 and base.is_zero():
            raise PoleError("zero raised to a negative power")
        return base**k
    if e.kind == "exp":
        v = _eval_tree(e.args, point)
        if v.is_zero():
            return _ONE
        return Scalar.from_complex(cmath.exp(complex(v)))
    if e.kind == "log":
        v = _eval_tree(e.args, point)
        if v.is_zero():
            raise PoleError("log of zero")
        if v.is_one():
            return _ZERO
        return Scalar.from_complex(cmath.log(complex(v)))
    raise ValueError(f"unknown expression kind {e.kind!r}")


# ---------------------------------------------------------------------------
# System specification


@dataclass(frozen=True)
class SystemSpec:
    """Ordered expanded variables Z = (t, states, params) with right-hand sides.

    active is the set of state variable indices integrated as ODEs; states
    outside it carry algebraic equations f = 0.  An empty active set is
    fixed-point mode.
    """

    names: tuple
    roles: tuple
    rhs: tuple
    active: frozenset

    def __post_init__(self):
        if self.roles.count("time") != 1 or self.roles[0] != "time":
            raise ValueError("exactly one time variable, at index 0")
        if len(self.names) != len(set(self.names)):
            raise ValueError("duplicate variable names")
        if len(self.rhs) != len(self.state_indices):
            raise ValueError("one right-hand side per state variable")
        for f in self.rhs:
            for j in f.variables():
                if j >= self.m:
                    raise ValueError("right-hand side mentions an unknown variable")

    @property
    def m(self) -> int:
        return len(self.names)

    @property
    def state_indices(self):
        return [j for j, r in enumerate(self.roles) if r == "state"]

    @property
    def param_indices(self):
        return [j for j, r in enumerate(self.roles) if r == "param"]

    @property
    def n_states(self) -> int:
        return len(self.state_indices)

    @property
    def n_params(self) -> int:
        return len(self.param_indices)

    def is_algebraic(self) -> bool:
        return not self.active

    def is_full(self) -> bool:
        return self.active == frozenset(self.state_indices)

    def var_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def rhs_of(self, var: int) -> Expr:
        return self.rhs[self.state_indices.index(var)]

    def with_active(self, active) -> "SystemSpec":
        active = frozenset(active)
        states = set(self.state_indices)
        if not active <= states:
            raise ValueError("active set must consist of state variables")
        return SystemSpec(self.names, self.roles, self.rhs, active)


# ---------------------------------------------------------------------------
# DSL parser

_SECTIONS = ("vars", "params", "time", "odes", "eqs")


class _Lexer:
    def __init__(self, text: str, line: int):
        self.text = text
        self.line = line
        self.pos = 0
        self.tokens = []
        self._run()
        self.idx = 0

    def _run(self):
        t, n = self.text, len(self.text)
        p = 0
        while p < n:
            ch = t[p]
            if ch in " \t":
                p += 1
                continue
            col = p + 1
            if ch.isdigit():
                q = p
                while q < n and t[q].isdigit():
                    q += 1
                if q < n and t[q] == ".":
                    raise ParseError("decimal literals are not supported; use p/q rationals", self.line, col)
                self.tokens.append(("int", int(t[p:q]), col))
                p = q
            elif ch.isalpha() or ch == "_":
                q = p
                while q < n and (t[q].isalnum() or t[q] == "_"):
                    q += 1
                self.tokens.append(("name", t[p:q], col))
                p = q
            elif ch in "+-*/^()='":
                self.tokens.append((ch, ch, col))
                p += 1
            else:
                raise ParseError(f"unexpected character {ch!r}", self.line, col)
        self.tokens.append(("end", None, n + 1))

    def peek(self):
        return self.tokens[self.idx]

    def next(self):
        tok = self.tokens[self.idx]
        if tok[0] != "end":
            self.idx += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", self.line, tok[2])
        return tok


class _ExprParser:
    def __init__(self, lexer: _Lexer, names: dict, nvars: int):
        self.lex = lexer
        self.names = names
        self.nvars = nvars

    def parse(self, stop_at_eq: bool = False) -> Expr:
        e = self._sum()
        tok = self.lex.peek()
        if tok[0] == "end" or (stop_at_eq and tok[0] == "="):
            return e
        raise ParseError(f"unexpected {tok[1]!r} in expression", self.lex.line, tok[2])

    def _sum(self) -> Expr:
        e = self._term()
        while True:
            tok = self.lex.peek()
            if tok[0] == "+":
                self.lex.next()
                e = e + self._term()
            elif tok[0] == "-":
                self.lex.next()
                e = e - self._term()
            else:
                return e

    def _term(self) -> Expr:
        e = self._factor()
        while True:
            tok = self.lex.peek()
            if tok[0] == "*":
                self.lex.next()
                e = e * self._factor()
            elif tok[0] == "/":
                self.lex.next()
                tok2 = self.lex.peek()
                rhs = self._factor()
                if rhs.kind == "const" and rhs.args.is_zero():
                    raise ParseError("division by literal zero", self.lex.line, tok2[2])
                e = e / rhs
            else:
                return e

    def _factor(self) -> Expr:
        tok = self.lex.peek()
        if tok[0] == "-":
            self.lex.next()
            return -self._factor()
        if tok[0] == "+":
            self.lex.next()
            return self._factor()
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        tok = self.lex.peek()
        if tok[0] != "^":
            return base
        self.lex.next()
        return base ** self._exponent()

    def _exponent(self) -> int:
        tok = self.lex.next()
        if tok[0] == "int":
            return tok[1]
        if tok[0] == "-":
            return -self.lex.expect("int")[1]
        if tok[0] == "(":
            sign = 1
            tok = self.lex.next()
            if tok[0] == "-":
                sign = -1
                tok = self.lex.next()
            if tok[0] != "int":
                raise ParseError("exponents must be integers", self.lex.line, tok[2])
            self.lex.expect(")")
            return sign * tok[1]
        raise ParseError("exponents must be integers", self.lex.line, tok[2])

    def _atom(self) -> Expr:
        tok = self.lex.next()
        if tok[0] == "int":
            return Expr.const(self.nvars, tok[1])
        if tok[0] == "name":
            if tok[1] == "i":
                return Expr.const(self.nvars, Scalar.i())
            j = self.names.get(tok[1])
            if j is None:
                raise ParseError(f"undeclared identifier {tok[1]!r}", self.lex.line, tok[2])
            return Expr.var(self.nvars, j)
        if tok[0] == "(":
            e = self._sum()
            self.lex.expect(")")
            return e
        raise ParseError(f"unexpected {tok[1]!r} in expression", self.lex.line, tok[2])


def parse_system(text: str) -> SystemSpec:
    """Parse the line-oriented DSL into a SystemSpec."""
    time_name = None
    var_names: list = []
    param_names: list = []
    ode_lines = []
    eq_lines = []
    section = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(":", 1)[0].strip()
        if ":" in line and head in _SECTIONS:
            section = head
            if head in seen:
                raise ParseError(f"duplicate section {head!r}", lineno, 1)
            seen.add(head)
            rest = line.split(":", 1)[1].strip()
            if head in ("vars", "params"):
                target = var_names if head == "vars" else param_names
                for nm in rest.split():
                    _check_name(nm, lineno)
                    target.append(nm)
            elif head == "time":
                if rest:
                    _check_name(rest, lineno)
                    time_name = rest
            continue
        if section == "vars":
            for nm in line.split():
                _check_name(nm, lineno)
                var_names.append(nm)
        elif section == "params":
            for nm in line.split():
                _check_name(nm, lineno)
                param_names.append(nm)
        elif section == "odes":
            ode_lines.append((lineno, line))
        elif section == "eqs":
            eq_lines.append((lineno, line))
        else:
            raise ParseError(f"statement outside any section: {line!r}", lineno, 1)

    if time_name is None:
        time_name = "t"
    names = [time_name] + var_names + param_names
    if len(names) != len(set(names)):
        dupe = next(nm for nm in names if names.count(nm) > 1)
        raise ParseError(f"duplicate variable {dupe!r}")
    roles = ["time"] + ["state"] * len(var_names) + ["param"] * len(param_names)
    index = {nm: j for j, nm in enumerate(names)}
    m = len(names)

    odes: dict = {}
    for lineno, line in ode_lines:
        lex = _Lexer(line, lineno)
        nm = lex.expect("name")
        lex.expect("'")
        lex.expect("=")
        j = index.get(nm[1])
        if j is None:
            raise ParseError(f"undeclared identifier {nm[1]!r}", lineno, nm[2])
        if roles[j] != "state":
            raise ParseError(f"{nm[1]!r} is not a state variable", lineno, nm[2])
        if j in odes:
            raise ParseError(f"duplicate equation for {nm[1]!r}", lineno, nm[2])
        odes[j] = _ExprParser(lex, index, m).parse()

    eqs = []
    for lineno, line in eq_lines:
        lex = _Lexer(line, lineno)
        parser = _ExprParser(lex, index, m)
        lhs = parser.parse(stop_at_eq=True)
        lex.expect("=")
        rhs = parser.parse()
        eqs.append(lhs - rhs)

    free_states = [j for j, r in enumerate(roles) if r == "state" and j not in odes]
    if len(eqs) != len(free_states):
        raise ParseError(
            f"system declares {len(var_names)} state variables but provides "
            f"{len(odes)} odes and {len(eqs)} equations"
        )
    rhs_list = []
    eq_iter = iter(eqs)
    for j in range(m):
        if roles[j] != "state":
            continue
        rhs_list.append(odes[j] if j in odes else next(eq_iter))
    for f in rhs_list:
        f.fraction()
    return SystemSpec(tuple(names), tuple(roles), tuple(rhs_list), frozenset(odes))


def _check_name(nm: str, lineno: int):
    if nm == "i":
        raise ParseError("'i' is reserved for the imaginary unit", lineno, 1)
    if not (nm[0].isalpha() or nm[0] == "_") or not all(c.isalnum() or c == "_" for c in nm):
        raise ParseError(f"invalid identifier {nm!r}", lineno, 1)


# ---------------------------------------------------------------------------
# Printing


def _scalar_str(c: Scalar, product_context: bool) -> str:
    """Render a coefficient; parenthesized when it multiplies a monomial."""
    s = str(c)
    if product_context and not c.exact and ("+" in s[1:] or "-" in s[1:]):
        return f"({s})"
    if product_context and c.exact and c.re != 0 and c.im != 0:
        return f"({s})"
    return s


def print_poly(p: Poly, names) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for mono, c in p.sorted_terms():
        factors = []
        for j, k in enumerate(mono):
            if k == 1:
                factors.append(names[j])
            elif k > 1:
                factors.append(f"{names[j]}^{k}")
        if not factors:
            term = _scalar_str(c, False)
        elif c.is_one():
            term = "*".join(factors)
        elif c == Scalar(-1):
            term = "-" + "*".join(factors)
        else:
            term = _scalar_str(c, True) + "*" + "*".join(factors)
        parts.append(term)
    out = parts[0]
    for term in parts[1:]:
        if term.startswith("-"):
            out += " - " + term[1:]
        else:
            out += " + " + term
    return out


def print_expr(e: Expr, names) -> str:
    f = e.fraction()
    if f is not None:
        n, d = f
        if d.is_constant() and d.constant_value().is_one():
            return print_poly(n, names)
        nstr = print_poly(n, names)
        dstr = print_poly(d, names)
        return f"({nstr})/({dstr})"
    return _print_tree(e, names)


def _print_tree(e: Expr, names) -> str:
    if e.kind == "const":
        return _scalar_str(e.args, False)
    if e.kind == "var":
        return names[e.args]
    if e.kind == "frac":
        return print_expr(Expr.from_fraction(e.nvars, *e.args), names)
    if e.kind == "add":
        rhs = _print_tree(e.args[1], names)
        if rhs.startswith("-"):
            return f"{_print_tree(e.args[0], names)} - {rhs[1:]}"
        return f"{_print_tree(e.args[0], names)} + {rhs}"
    if e.kind == "mul":
        return f"{_paren(e.args[0], names)}*{_paren(e.args[1], names)}"
    if e.kind == "div":
        return f"{_paren(e.args[0], names)}/{_paren(e.args[1], names)}"
    if e.kind == "pow":
        return f"{_paren(e.args[0], names)}^{e.args[1]}"
    if e.kind == "log":
        return f"log({_print_tree(e.args, names)})"
    if e.kind == "exp":
        return f"exp({_print_tree(e.args, names)})"
    raise ValueError(f"unknown expression kind {e.kind!r}")


def _paren(e: Expr, names) -> str:
    s = print_expr(e, names) if e.fraction() is not None else _print_tree(e, names)
    if e.kind in ("add",) or s.startswith("-") or (" " in s):
        return f"({s})"
    if e.kind == "frac":
        n, d = e.args
        if not (d.is_constant() and d.constant_value().is_one()) or len(n.terms) > 1:
            return f"({s})" if not s.startswith("(") else s
    return s


def print_system(spec: SystemSpec) -> str:
    """Render a SystemSpec back to DSL text (round-trips through parse)."""
    lines = []
    states = [spec.names[j] for j in spec.state_indices]
    params = [spec.names[j] for j in spec.param_indices]
    lines.append("vars: " + " ".join(states))
    lines.append("params: " + " ".join(params))
    lines.append(f"time: {spec.names[0]}")
    odes = [(j, f) for j, f in zip(spec.state_indices, spec.rhs) if j in spec.active]
    eqs = [(j, f) for j, f in zip(spec.state_indices, spec.rhs) if j not in spec.active]
    if odes:
        lines.append("odes:")
        for j, f in odes:
            lines.append(f"  {spec.names[j]}' = {print_expr(f, spec.names)}")
    if eqs:
        lines.append("eqs:")
        for _, f in eqs:
            lines.append(f"  {print_expr(f, spec.names)} = 0")
    return "\n".join(lines) + "\n"
