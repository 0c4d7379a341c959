"""Bundle-geometric operators on the time-fibred configuration space.

Total derivatives on velocity and momentum phase space, jet prolongations of
projectable vector fields, the canonical lift to momentum phase space, the
horizontal operator on one-forms, closedness checks, and potentials of exact
one-forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import symbols as sy
from .antideriv import antiderivative
from .expr import (
    ONE,
    ZERO,
    DEFAULT_PROBES,
    Expr,
    ProbeConfig,
    ZeroVerdict,
    add,
    as_expr,
    contains_kind,
    diff,
    evaluate,
    free_symbols,
    is_zero,
    mul,
    neg,
    sub,
    substitute,
    sym,
    weakest,
)
from .symbols import Symbol, SymbolKind

_Q_KINDS = (SymbolKind.TIME, SymbolKind.COORD, SymbolKind.PARAMETER)


class ModeError(ValueError):
    """Expression uses symbols that contradict the requested jet space."""


def _check_on_q(e: Expr, what: str):
    bad = [
        s
        for s in free_symbols(e)
        if s.kind not in _Q_KINDS
    ]
    if bad:
        raise ValueError(f"{what} must depend only on (t, q, params); found {bad}")


@dataclass(frozen=True)
class ProjectableVectorField:
    """Generator u = u_t*d/dt + u^i*d/dq_i with u_t in {0, 1}.

    The u_t = 1 case doubles as a connection, i.e. a reference frame.
    """

    u_t: int
    components: tuple
    dimension: int

    def __post_init__(self):
        if self.u_t not in (0, 1):
            raise ValueError("the time component of a generator must be 0 or 1")
        comps = tuple(as_expr(c) for c in self.components)
        if len(comps) != self.dimension:
            raise ValueError("component count does not match dimension")
        for c in comps:
            _check_on_q(c, "vector field component")
        object.__setattr__(self, "components", comps)

    @property
    def is_connection(self) -> bool:
        return self.u_t == 1

    @property
    def is_vertical(self) -> bool:
        return self.u_t == 0

    def __str__(self):
        parts = []
        if self.u_t:
            parts.append("dt")
        for i, c in enumerate(self.components, start=1):
            if c == ZERO:
                continue
            if c == ONE:
                parts.append(f"dq{i}")
            else:
                parts.append(f"({c}) dq{i}")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class OneFormOnQ:
    """phi = phi_t dt + phi_i dq^i with coefficients on (t, q)."""

    phi_t: Expr
    phi_i: tuple
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "phi_t", as_expr(self.phi_t))
        comps = tuple(as_expr(c) for c in self.phi_i)
        if len(comps) != self.dimension:
            raise ValueError("component count does not match dimension")
        _check_on_q(self.phi_t, "one-form coefficient")
        for c in comps:
            _check_on_q(c, "one-form coefficient")
        object.__setattr__(self, "phi_i", comps)


@dataclass(frozen=True)
class ProlongedField:
    """First (and optionally second) jet prolongation of a generator."""

    base: ProjectableVectorField
    vel_components: tuple
    acc_components: Optional[tuple] = None


@dataclass(frozen=True)
class PhaseVectorField:
    """Canonical lift to momentum phase space; momenta move contragrediently."""

    u_t: int
    components: tuple
    momentum_components: tuple
    dimension: int

    def __post_init__(self):
        expected = tuple(
            add(*(neg(mul(sym(sy.momentum(j)), diff(self.components[j - 1], sy.coord(i))))
                  for j in range(1, self.dimension + 1)))
            for i in range(1, self.dimension + 1)
        )
        for got, want in zip(self.momentum_components, expected):
            if got != want:
                raise ValueError("momentum components contradict the canonical lift formula")


def total_derivative(e: Expr, mode: str = "velocity") -> Expr:
    """Total time derivative along solutions, as a formal jet operator.

    Velocity mode maps order-r expressions on (t, q, q_t) to order r+1;
    momentum (phase) mode acts on (t, q, p) and introduces the formal jet
    symbols p_i_t.
    """
    syms = free_symbols(e)
    if mode == "velocity":
        banned = {SymbolKind.MOMENTUM, SymbolKind.MOMENTUM_DOT, SymbolKind.HOMOGENEOUS_MOMENTUM}
        if any(s.kind in banned for s in syms):
            raise ModeError("momentum symbols in a velocity-space total derivative")
        out = [diff(e, sy.TIME)]
        for s in syms:
            if s.kind == SymbolKind.COORD:
                out.append(mul(sym(sy.velocity(s.index)), diff(e, s)))
            elif s.kind == SymbolKind.VELOCITY:
                out.append(mul(sym(sy.acceleration(s.index)), diff(e, s)))
        return add(*out)
    if mode == "phase":
        banned = {SymbolKind.VELOCITY, SymbolKind.ACCELERATION, SymbolKind.MOMENTUM_DOT,
                  SymbolKind.HOMOGENEOUS_MOMENTUM}
        if any(s.kind in banned for s in syms):
            raise ModeError("velocity symbols in a phase-space total derivative")
        out = [diff(e, sy.TIME)]
        for s in syms:
            if s.kind == SymbolKind.COORD:
                out.append(mul(sym(sy.velocity(s.index)), diff(e, s)))
            elif s.kind == SymbolKind.MOMENTUM:
                out.append(mul(sym(sy.momentum_dot(s.index)), diff(e, s)))
        return add(*out)
    raise ValueError(f"unknown mode {mode!r}")


def prolong1(u: ProjectableVectorField) -> ProlongedField:
    """Prolong to velocity phase space: velocity directions gain d_t(u^i)."""
    vel = tuple(total_derivative(c, "velocity") for c in u.components)
    return ProlongedField(u, vel)


def prolong2(u: ProjectableVectorField) -> ProlongedField:
    """Prolong to acceleration space: adds d_t(d_t(u^i)) components."""
    vel = tuple(total_derivative(c, "velocity") for c in u.components)
    acc = tuple(total_derivative(c, "velocity") for c in vel)
    return ProlongedField(u, vel, acc)


def canonical_lift(u: ProjectableVectorField) -> PhaseVectorField:
    """Lift to momentum phase space: w_i = -sum_j p_j * d(u^j)/dq_i."""
    n = u.dimension
    w = tuple(
        add(*(neg(mul(sym(sy.momentum(j)), diff(u.components[j - 1], sy.coord(i))))
              for j in range(1, n + 1)))
        for i in range(1, n + 1)
    )
    return PhaseVectorField(u.u_t, u.components, w, n)


def h0(phi: OneFormOnQ) -> Expr:
    """Horizontal projection: the density phi_t + q_t^i phi_i."""
    parts = [phi.phi_t]
    for i, c in enumerate(phi.phi_i, start=1):
        parts.append(mul(sym(sy.velocity(i)), c))
    return add(*parts)


def exterior_derivative_coeffs(f: Expr, dimension: int) -> OneFormOnQ:
    """df as a one-form on Q, for functions f(t, q)."""
    _check_on_q(f, "function on Q")
    return OneFormOnQ(diff(f, sy.TIME), tuple(diff(f, sy.coord(i)) for i in range(1, dimension + 1)),
                      dimension)


def is_closed(phi: OneFormOnQ, probes: ProbeConfig = DEFAULT_PROBES) -> ZeroVerdict:
    """Verdict that d(phi) = 0, the weakest verdict over all components."""
    checks = []
    for i in range(1, phi.dimension + 1):
        checks.append(sub(diff(phi.phi_t, sy.coord(i)), diff(phi.phi_i[i - 1], sy.TIME)))
    for i in range(1, phi.dimension + 1):
        for j in range(i + 1, phi.dimension + 1):
            checks.append(sub(diff(phi.phi_i[j - 1], sy.coord(i)), diff(phi.phi_i[i - 1], sy.coord(j))))
    return weakest(is_zero(c, probes) for c in checks)


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(24)


class NumericPotential:
    """Potential of a closed one-form evaluated by quadrature on demand.

    Falls back to integrating phi along the straight ray from the base point;
    used when the coefficients lie outside the symbolic integration class.
    """

    def __init__(self, phi: OneFormOnQ, base_point: Optional[Sequence[float]] = None):
        self.phi = phi
        self.base_point = tuple(base_point) if base_point is not None else (0.0,) * (phi.dimension + 1)

    def __call__(self, t: float, q: Sequence[float], params=None) -> float:
        assignment = dict(params or {})
        target = np.array([t, *q], dtype=float)
        base = np.array(self.base_point, dtype=float)
        delta = target - base
        total = 0.0
        for node, w in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
            s = 0.5 * (node + 1.0)
            pt = base + s * delta
            assignment[sy.TIME] = pt[0]
            for i in range(self.phi.dimension):
                assignment[sy.coord(i + 1)] = pt[i + 1]
            val = delta[0] * evaluate(self.phi.phi_t, assignment)
            for i in range(self.phi.dimension):
                val += delta[i + 1] * evaluate(self.phi.phi_i[i], assignment)
            total += 0.5 * w * val
        return total


def _ray_potential(phi: OneFormOnQ) -> Optional[Expr]:
    """Line integral along the ray s -> (s*t, s*q), evaluated symbolically."""
    s = sy.parameter("__s")
    scale = {sy.TIME: mul(sym(s), sym(sy.TIME))}
    for i in range(1, phi.dimension + 1):
        scale[sy.coord(i)] = mul(sym(s), sym(sy.coord(i)))
    integrand = mul(sym(sy.TIME), substitute(phi.phi_t, scale))
    for i in range(1, phi.dimension + 1):
        integrand = add(integrand, mul(sym(sy.coord(i)), substitute(phi.phi_i[i - 1], scale)))
    F = antiderivative(integrand, s)
    if F is None:
        return None
    hi = substitute(F, {s: ONE})
    lo = substitute(F, {s: ZERO})
    out = sub(hi, lo)
    if s in free_symbols(out):
        return None
    return out


def _axis_potential(phi: OneFormOnQ) -> Optional[Expr]:
    """Staircase line integral, one axis at a time.

    Equivalent to the ray integral for closed forms, but keeps exponential
    rates constant inside each one-dimensional integration, which the
    symbolic antiderivative can handle.
    """
    zero_tail = {sy.coord(i): ZERO for i in range(1, phi.dimension + 1)}
    total = ZERO
    # time leg at q = 0
    F = antiderivative(substitute(phi.phi_t, zero_tail), sy.TIME)
    if F is None:
        return None
    total = add(total, sub(F, substitute(F, {sy.TIME: ZERO})))
    # coordinate legs, later coordinates still frozen at zero
    for i in range(1, phi.dimension + 1):
        frozen = {sy.coord(j): ZERO for j in range(i + 1, phi.dimension + 1)}
        integrand = substitute(phi.phi_i[i - 1], frozen)
        F = antiderivative(integrand, sy.coord(i))
        if F is None:
            return None
        total = add(total, sub(F, substitute(F, {sy.coord(i): ZERO})))
    return total


def exact_potential(phi: OneFormOnQ, probes: ProbeConfig = DEFAULT_PROBES):
    """Potential sigma with d(sigma) = phi, vanishing at the origin.

    Requires phi to be closed (caller's responsibility to check).  Returns an
    Expr when the coefficients are polynomial or polynomial-times-exponential;
    otherwise a NumericPotential fallback.  The symbolic result is verified by
    differentiating back.  The axis path is preferred because it keeps
    exponential rates constant per leg; for closed forms both paths agree.
    """
    for candidate in (_axis_potential(phi), _ray_potential(phi)):
        if candidate is None:
            continue
        back = exterior_derivative_coeffs(candidate, phi.dimension)
        residuals = [sub(back.phi_t, phi.phi_t)]
        residuals.extend(sub(a, b) for a, b in zip(back.phi_i, phi.phi_i))
        if weakest(is_zero(r, probes) for r in residuals).is_zero_class:
            return candidate
    return NumericPotential(phi)
