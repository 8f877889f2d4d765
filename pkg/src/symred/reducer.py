"""Invariantization: substitute the cross-section hyperplane and loop.

One step takes a usable generator with principal element rho, picks a pivot
variable from the linear form q, substitutes the solved pivot into every
right-hand side, and emits the hatted system together with the back-map
Z = Psi(tau, Z_hat).  Ratio steps report tau as an expression in the
original variables; log steps report a multiplicative group parameter
g = e^{lambda tau} whose value is the preprincipal element of the original
point, which keeps the emitted strings rational whenever the eigenvalue
ratios are integers.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field

from ._poly import Poly
from ._scalar import Scalar
from .canon import (
    AffineFlow,
    NoPrincipalElement,
    PrincipalElement,
    affine_flow,
    principal_element,
)
from .detsys import build_determining_system
from .liealg import build_bracket_table, generator_preference
from .linsolve import SymGenerator, SymredWarning, filter_spurious, lll_reduce, solve_kernel
from .sysio import Expr, SymredError, SystemSpec, print_expr, substitute

_ZERO = Scalar.zero()
_ONE = Scalar.one()


class ReductionRejected(SymredError):
    """The generator cannot drive a reduction step (guard or pivot failure)."""


@dataclass
class ReductionStep:
    generator: SymGenerator
    principal: PrincipalElement
    pivot: int
    pivot_name: str
    substitution: Expr
    survivors: list
    rename: dict
    hatted: SystemSpec
    flow: AffineFlow
    symbol: str
    relation: str
    parameterization: list

    # -- numeric helpers used by the verification harness ---------------
    def tau_of(self, point) -> complex:
        import cmath

        pt = [complex(x) for x in point]
        if self.principal.kind == "ratio":
            from .sysio import evaluate

            return complex(evaluate(self.principal.rho, pt))
        coeffs, const = self.principal.hyperplane_coefficients(len(point))
        u = sum(complex(c) * v for c, v in zip(coeffs, pt)) + complex(const) + 1.0
        if abs(u) < 1e-12:
            raise ReductionRejected("degenerate sample: preprincipal vanishes")
        return cmath.log(u) / complex(self.principal.eigenvalue)

    def project(self, point):
        """Drop onto the hyperplane along the orbit; returns the hatted point."""
        tau = self.tau_of(point)
        full = self.flow.apply_numeric(-tau, [complex(x) for x in point])
        return tau, [full[j] for j in self.survivors]

    def embed_affine(self):
        """Affine map (A, b) sending hatted coordinates onto the hyperplane."""
        m = self.flow.m
        coeffs, const = self.principal.hyperplane_coefficients(m)
        cp = complex(coeffs[self.pivot])
        a = [[0.0 + 0.0j] * len(self.survivors) for _ in range(m)]
        b = [0.0 + 0.0j] * m
        for new, old in enumerate(self.survivors):
            a[old][new] = 1.0 + 0.0j
            a[self.pivot][new] = -complex(coeffs[old]) / cp
        b[self.pivot] = -complex(const) / cp
        return a, b


@dataclass
class ReducedSystem:
    original: SystemSpec
    steps: list
    final: SystemSpec
    warnings: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def parameterization(self):
        out = []
        for step in self.steps:
            out.append(
                {
                    "symbol": step.symbol,
                    "relation": step.relation,
                    "map": dict(step.parameterization),
                }
            )
        return out

    def to_json_dict(self) -> dict:
        from .sysio import print_system

        def spec_block(spec):
            return {
                "text": print_system(spec),
                "variables": list(spec.names),
                "states": [spec.names[j] for j in spec.state_indices],
                "parameters": [spec.names[j] for j in spec.param_indices],
                "odes": sorted(spec.names[j] for j in spec.active),
            }

        steps = []
        for k, s in enumerate(self.steps, start=1):
            pre_names = self.original.names if k == 1 else self.steps[k - 2].hatted.names
            steps.append(
                {
                    "index": k,
                    "generator": {
                        "action": s.generator.derivation.describe(pre_names),
                        "lambda": str(s.generator.lam),
                    },
                    "principal": {
                        "kind": s.principal.kind,
                        "preprincipal": print_expr(s.principal.preprincipal, pre_names),
                        "eigenvalue": None
                        if s.principal.eigenvalue is None
                        else str(s.principal.eigenvalue),
                        "hyperplane": print_expr(s.principal.hyperplane, pre_names),
                    },
                    "pivot": s.pivot_name,
                    "substitution": {s.pivot_name: print_expr(s.substitution, pre_names)},
                    "rename": dict(s.rename),
                    "symbol": s.symbol,
                    "relation": s.relation,
                    "parameterization": dict(s.parameterization),
                }
            )
        return {
            "original": spec_block(self.original),
            "steps": steps,
            "final": spec_block(self.final),
            "parameterization": self.parameterization,
            "warnings": list(self.warnings),
            "notes": list(self.notes),
        }


def _role_rank(role: str) -> int:
    return {"param": 0, "state": 1, "time": 2}[role]


def _column_density(spec: SystemSpec, z: int) -> int:
    from .sysio import differentiate

    return sum(1 for f in spec.rhs if not differentiate(f, z).is_zero())


def _reindex_expr(e: Expr, perm: dict, new_nvars: int) -> Expr:
    num, den = e.fraction()

    def remap(p: Poly) -> Poly:
        terms = {}
        for mono, c in p.terms.items():
            out = [0] * new_nvars
            for j, k in enumerate(mono):
                if not k:
                    continue
                if j not in perm:
                    raise ValueError("expression still involves an eliminated variable")
                out[perm[j]] = k
            terms[tuple(out)] = c
        return Poly(new_nvars, terms)

    return Expr.from_fraction(new_nvars, remap(num), remap(den))


def _base_name(name: str, step_label: int) -> str:
    if step_label > 1:
        suffix = f"_{step_label - 1}"
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def invariantize(
    spec: SystemSpec,
    gen: SymGenerator,
    principal: PrincipalElement | None = None,
    step_label: int = 1,
) -> ReductionStep:
    """One invariantization step of the system along the generator."""
    d = gen.derivation
    m = spec.m
    p = principal if principal is not None else principal_element(d)
    coeffs, const = p.hyperplane_coefficients(m)

    if spec.active:
        # guard: the hyperplane must be a first integral of the dynamics
        guard = Expr.const(m, coeffs[0])
        for j in spec.active:
            if not coeffs[j].is_zero():
                guard = guard + Expr.const(m, coeffs[j]) * spec.rhs_of(j)
        if not guard.is_zero():
            raise ReductionRejected(
                "hyperplane is not constant along the dynamics (D q != 0)"
            )

    candidates = [z for z in range(m) if not coeffs[z].is_zero()]
    candidates = [z for z in candidates if spec.roles[z] != "time"]
    if not candidates:
        raise ReductionRejected("hyperplane involves only the time variable")
    pivot = min(candidates, key=lambda z: (_role_rank(spec.roles[z]), _column_density(spec, z), z))

    cp = coeffs[pivot]
    rest = Poly.const(m, const)
    for z in range(m):
        if z != pivot and not coeffs[z].is_zero():
            rest = rest + Poly.var(m, z).scale(coeffs[z])
    subst = Expr.from_poly(m, rest.scale(-_ONE / cp))

    new_rhs = {}
    for j, f in zip(spec.state_indices, spec.rhs):
        new_rhs[j] = substitute(f, {pivot: subst})

    survivors = [z for z in range(m) if z != pivot]
    roles = {z: spec.roles[z] for z in survivors}
    active = set(spec.active)
    if spec.roles[pivot] == "state":
        if pivot in active:
            active.discard(pivot)
            new_rhs.pop(pivot)
        else:
            # an algebraic equation loses its variable: promote a parameter
            promoted = next((z for z in survivors if roles[z] == "param"), None)
            if promoted is None:
                raise ReductionRejected(
                    "cannot eliminate the last variable of an algebraic equation"
                )
            roles[promoted] = "state"
            new_rhs[promoted] = new_rhs.pop(pivot)

    ordered = (
        [0]
        + [z for z in survivors if z != 0 and roles[z] == "state"]
        + [z for z in survivors if roles[z] == "param"]
    )
    taken = set()
    rename = {}
    for z in ordered:
        base = _base_name(spec.names[z], step_label)
        new = f"{base}_{step_label}"
        while new in taken:
            new += "x"
        taken.add(new)
        rename[spec.names[z]] = new
    perm = {z: k for k, z in enumerate(ordered)}
    hatted = SystemSpec(
        tuple(rename[spec.names[z]] for z in ordered),
        tuple(roles[z] if z != 0 else "time" for z in ordered),
        tuple(
            _reindex_expr(new_rhs[z], perm, len(ordered))
            for z in ordered
            if roles.get(z) == "state"
        ),
        frozenset(perm[z] for z in active),
    )

    flow = affine_flow(d)
    symbol = (f"tau{step_label}" if p.kind == "ratio" else f"g{step_label}")
    if p.kind == "ratio":
        relation = f"{symbol} = {print_expr(p.rho, spec.names)}"
    else:
        relation = f"{symbol} = {print_expr(p.preprincipal, spec.names)}"
    parameterization = _parameterization_strings(spec, p, flow, ordered, perm, rename, subst, pivot, symbol)

    return ReductionStep(
        generator=gen,
        principal=p,
        pivot=pivot,
        pivot_name=spec.names[pivot],
        substitution=subst,
        survivors=ordered,
        rename=rename,
        hatted=hatted,
        flow=flow,
        symbol=symbol,
        relation=relation,
        parameterization=parameterization,
    )


def _parameterization_strings(spec, p, flow, ordered, perm, rename, subst, pivot, symbol):
    """Render Z = Psi(tau, Z_hat) over the hatted names plus the free symbol."""
    m = spec.m
    nv = len(ordered) + 1
    sym_idx = nv - 1
    names = [rename[spec.names[z]] for z in ordered] + [symbol]

    subst_hat = _reindex_expr(subst, perm, nv)
    values = {}
    for z in range(m):
        values[z] = Expr.var(nv, perm[z]) if z in perm else subst_hat

    if p.kind == "log":
        lam0 = p.eigenvalue

    def factor_for(lam: Scalar, poly_tau: Poly) -> Expr:
        """poly(tau) * e^{lam tau} over the hatted space."""
        sym = Expr.var(nv, sym_idx)
        if p.kind == "ratio":
            tau_expr = sym
        else:
            tau_expr = Expr.log(sym) / Expr.const(nv, lam0)
        # rewrite the tau polynomial through the symbol
        part = Expr.const(nv, 0)
        for mono, c in poly_tau.sorted_terms():
            k = mono[flow.m]
            if any(mono[: flow.m]):
                raise AssertionError("flow polynomials only involve tau")
            term = Expr.const(nv, c)
            if k:
                term = term * tau_expr**k
            part = part + term
        if lam.is_zero():
            return part
        if p.kind == "ratio":
            return part * Expr.exp(Expr.const(nv, lam) * sym)
        ratio = lam / lam0
        if ratio.is_integer():
            return part * sym ** int(ratio.re)
        return part * Expr.exp(Expr.const(nv, ratio) * Expr.log(sym))

    out = []
    for z in range(m):
        total = Expr.const(nv, 0)
        for w in range(m):
            ep = flow.matrix[z][w]
            if ep.is_zero():
                continue
            lifted = Expr.const(nv, 0)
            for key, poly in sorted(ep.terms.items(), key=lambda kv: kv[0][0].sort_key()):
                lifted = lifted + factor_for(key[0], poly)
            total = total + lifted * values[w]
        if not flow.offset[z].is_zero():
            for key, poly in sorted(flow.offset[z].terms.items(), key=lambda kv: kv[0][0].sort_key()):
                total = total + factor_for(key[0], poly)
        out.append((spec.names[z], _print_mixed(total, names)))
    return out


def _print_mixed(e: Expr, names) -> str:
    return print_expr(e, names)


def reduce_loop(spec: SystemSpec, seed: int, max_steps: int) -> ReducedSystem:
    """build -> solve -> lll -> filter -> choose -> principal -> invariantize, repeated."""
    master = random.Random(seed)
    steps = []
    collected_warnings = []
    notes = []
    current = spec
    while len(steps) < max_steps:
        ds = build_determining_system(current)
        sub_seed = master.getrandbits(63)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", SymredWarning)
            basis, _trace = solve_kernel(ds, sub_seed)
            basis = lll_reduce(basis)
            basis = filter_spurious(basis, current)
            table = build_bracket_table(basis)
            order, heuristic = generator_preference(basis, table)
        collected_warnings.extend(str(w.message) for w in caught)
        if heuristic:
            collected_warnings.append(
                f"step {len(steps) + 1}: no usable generator spans a one-dimensional "
                "ideal; solvable ordering is heuristic"
            )
        if not order:
            break
        made = None
        for idx in order:
            gen = basis.generators[idx]
            try:
                p = principal_element(gen.derivation)
            except NoPrincipalElement as exc:
                notes.append(f"step {len(steps) + 1}: generator skipped ({exc})")
                continue
            try:
                made = invariantize(current, gen, p, step_label=len(steps) + 1)
                break
            except ReductionRejected as exc:
                notes.append(f"step {len(steps) + 1}: generator rejected ({exc})")
        if made is None:
            break
        steps.append(made)
        current = made.hatted
    return ReducedSystem(spec, steps, current, collected_warnings, notes)
