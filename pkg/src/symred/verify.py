"""Numeric cross-validation of reductions against direct integration.

Fixed-step classical RK4 on both sides: the original system on its own time
grid, and the final reduced system on the grid pulled back through the
composed affine back-map (along one trajectory the time map is affine,
t = alpha * t_hat + beta, so the grids align exactly and no interpolation
enters the comparison).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from ._scalar import Scalar
from .detsys import AffineDerivation, build_determining_system
from .reducer import ReducedSystem, ReductionRejected
from .sysio import Expr, PoleError, SymredError, SystemSpec

_ZERO = Scalar.zero()


class DegenerateSample(SymredError):
    """Sampled parameters hit a degeneracy of the parameterization."""


@dataclass
class TrajectoryCheck:
    params: dict
    init: dict
    t_end: float
    h: float
    deviation: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("step size must be positive")
        if not (self.t_end == self.t_end and abs(self.t_end) != float("inf")):
            raise ValueError("time span must be finite")


def _compile(e: Expr):
    num, den = e.fraction()

    def prep(p):
        return [
            (complex(c), [(j, k) for j, k in enumerate(mono) if k])
            for mono, c in p.sorted_terms()
        ]

    nterms, dterms = prep(num), prep(den)

    def f(pt):
        n = 0j
        for c, vs in nterms:
            v = c
            for j, k in vs:
                v *= pt[j] ** k
            n += v
        d = 0j
        for c, vs in dterms:
            v = c
            for j, k in vs:
                v *= pt[j] ** k
            d += v
        if d == 0:
            raise PoleError("denominator vanished during integration")
        return n / d

    return f


def _rk4(spec: SystemSpec, point0, h: float, nsteps: int):
    """Raw fixed-step RK4 over the active states; returns full point samples."""
    active = sorted(spec.active)
    fns = [_compile(spec.rhs_of(j)) for j in active]
    pt = [complex(x) for x in point0]
    samples = [list(pt)]
    for _ in range(nsteps):
        k1 = [f(pt) for f in fns]
        p2 = list(pt)
        p2[0] += h / 2
        for i, j in enumerate(active):
            p2[j] = pt[j] + (h / 2) * k1[i]
        k2 = [f(p2) for f in fns]
        p3 = list(pt)
        p3[0] += h / 2
        for i, j in enumerate(active):
            p3[j] = pt[j] + (h / 2) * k2[i]
        k3 = [f(p3) for f in fns]
        p4 = list(pt)
        p4[0] += h
        for i, j in enumerate(active):
            p4[j] = pt[j] + h * k3[i]
        k4 = [f(p4) for f in fns]
        nxt = list(pt)
        nxt[0] = pt[0] + h
        for i, j in enumerate(active):
            nxt[j] = pt[j] + (h / 6) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
            if abs(nxt[j]) > 1e12:
                raise PoleError("state overflow during integration")
        pt = nxt
        samples.append(list(pt))
    return samples


def integrate(spec: SystemSpec, params: dict, init: dict, t_end: float, h: float):
    """Fixed-step RK4 trajectory of a full-mode system.

    Frozen (non-integrated) variables take their values from params/init and
    stay constant.  Returns [(t, {state name: value})] at every step.
    """
    values = dict(params)
    values.update(init)
    point = [0j] * spec.m
    for j in range(1, spec.m):
        nm = spec.names[j]
        if nm not in values:
            raise KeyError(f"no value supplied for {nm!r}")
        point[j] = complex(values[nm])
    nsteps = round(t_end / h)
    samples = _rk4(spec, point, h, nsteps)
    state_names = [(j, spec.names[j]) for j in sorted(spec.active)]
    return [
        (s[0].real, {nm: s[j] for j, nm in state_names})
        for s in samples
    ]


def _compose_backmap(steps):
    """Affine map from final coordinates to original coordinates."""
    a_total = None
    b_total = None
    for step, tau in reversed(steps):
        ae, be = step.embed_affine()
        e, v = step.flow.eval_numeric(tau)
        m = len(e)
        cols = len(ae[0])
        a_step = [[sum(e[i][k] * ae[k][j] for k in range(m)) for j in range(cols)] for i in range(m)]
        b_step = [sum(e[i][k] * be[k] for k in range(m)) + v[i] for i in range(m)]
        if a_total is None:
            a_total, b_total = a_step, b_step
        else:
            rows = len(a_total)
            inner = len(a_total[0])
            a_new = [
                [sum(a_step[i][k] * a_total[k][j] for k in range(rows)) for j in range(inner)]
                for i in range(len(a_step))
            ]
            b_new = [
                sum(a_step[i][k] * b_total[k] for k in range(rows)) + b_step[i]
                for i in range(len(a_step))
            ]
            a_total, b_total = a_new, b_new
    return a_total, b_total


def check_trajectory(r: ReducedSystem, params: dict, init: dict, t_end: float, h: float) -> TrajectoryCheck:
    """Integrate the reduced system, map back, compare with direct integration."""
    orig = r.original
    if not orig.is_full():
        raise SymredError("trajectory checks need a full vector-field system")
    point = [0j] * orig.m
    values = dict(params)
    values.update(init)
    for j in range(1, orig.m):
        nm = orig.names[j]
        if nm not in values:
            raise KeyError(f"no value supplied for {nm!r}")
        point[j] = complex(values[nm])

    # project through every step, recording the orbit parameters
    chain = []
    v = point
    for step in r.steps:
        try:
            tau, v = step.project(v)
        except ReductionRejected as exc:
            raise DegenerateSample(str(exc)) from None
        chain.append((step, tau))

    final = r.final
    if not final.active:
        raise SymredError("reduced system has no differential part left to integrate")
    if not chain:
        a_total = [[1.0 + 0j if i == j else 0j for j in range(orig.m)] for i in range(orig.m)]
        b_total = [0j] * orig.m
    else:
        a_total, b_total = _compose_backmap(chain)

    # the time row must involve only the reduced time and parameters
    scale = max(max(abs(x) for x in row) for row in a_total) or 1.0
    for j in final.state_indices:
        if abs(a_total[0][j]) > 1e-9 * scale:
            raise DegenerateSample("time back-map mixes evolving states")
    alpha = a_total[0][0]
    if abs(alpha.imag) > 1e-9 * abs(alpha) or abs(alpha) < 1e-12:
        raise DegenerateSample("time back-map scale is not a nonzero real")
    alpha = alpha.real

    nsteps = round(t_end / h)
    direct = _rk4(orig, point, h, nsteps)
    reduced = _rk4(final, v, h / alpha, nsteps)

    states = orig.state_indices
    deviation = 0.0
    for k in range(nsteps + 1):
        w = reduced[k]
        mapped = [
            sum(a_total[i][j] * w[j] for j in range(final.m)) + b_total[i]
            for i in range(orig.m)
        ]
        ref = direct[k]
        if abs(mapped[0] - ref[0]) > 1e-6 * max(1.0, abs(ref[0])):
            raise DegenerateSample("time grids failed to align")
        for j in states:
            err = abs(mapped[j] - ref[j]) / max(1.0, abs(ref[j]))
            if err > deviation:
                deviation = err
    return TrajectoryCheck(dict(params), dict(init), t_end, h, deviation)


def check_reduction(
    r: ReducedSystem,
    trials: int,
    seed: int,
    t_end: float = 2.0,
    h: float = 1e-3,
) -> dict:
    """Random-trial trajectory comparison; reports the max relative deviation."""
    rng = random.Random(seed)
    orig = r.original
    checks = []
    resamples = 0
    for _ in range(trials):
        for _attempt in range(50):
            params = {
                orig.names[j]: Fraction(rng.randint(1, 8), rng.randint(1, 3))
                for j in orig.param_indices
            }
            init = {
                orig.names[j]: Fraction(rng.randint(1, 4), rng.randint(1, 3))
                for j in orig.state_indices
            }
            try:
                checks.append(check_trajectory(r, params, init, t_end, h))
                break
            except (DegenerateSample, PoleError):
                resamples += 1
                continue
        else:
            raise SymredError("could not sample non-degenerate trial parameters")
    return {
        "trials": len(checks),
        "resamples": resamples,
        "max_deviation": max((c.deviation for c in checks), default=0.0),
        "checks": checks,
    }


def check_symmetry_numeric(
    spec: SystemSpec,
    d: AffineDerivation,
    lam: Scalar,
    trials: int,
    seed: int = 0,
) -> dict:
    """Evaluate the determining residuals of (delta, lambda) at random points."""
    ds = build_determining_system(spec)
    residuals = ds.residuals_for(d, lam)
    rng = random.Random(seed)
    worst = 0.0
    exact_zero = True
    for _ in range(trials):
        for _attempt in range(100):
            pt = [Scalar(rng.randint(-50, 50)) for _ in range(spec.m)]
            if all(not den.evaluate(pt).is_zero() for den in ds.denominators):
                break
        else:
            raise SymredError("no pole-free evaluation point found")
        for res in residuals:
            num, _den = res.fraction()
            val = num.evaluate(pt)
            if not val.is_zero():
                exact_zero = False
            worst = max(worst, abs(val))
    return {"max_abs_residual": worst, "exact_zero": exact_zero, "trials": trials}
