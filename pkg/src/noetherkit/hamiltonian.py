"""Hamiltonian mechanics on momentum phase space.

Hamilton vector fields and equations, the equivalent phase-space Lagrangian
(whose variational equations are the Hamilton equations), Lie derivatives
along canonical lifts, symmetry classification, and the Poisson bracket on
the homogeneous phase space carrying the extra momentum coordinate p.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import symbols as sy
from .antideriv import antiderivative
from .expr import (
    DEFAULT_PROBES,
    ONE,
    ZERO,
    Expr,
    ProbeConfig,
    ZeroVerdict,
    add,
    as_expr,
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
from .jet import ProjectableVectorField, canonical_lift, total_derivative
from .lagrangian import (
    ConservedQuantity,
    Lagrangian,
    Provenance,
    SymmetryClass,
    SymmetryReport,
    euler_lagrange,
    lie_derivative_lagrangian,
)
from .symbols import Symbol, SymbolKind


@dataclass(frozen=True)
class Hamiltonian:
    """Hamiltonian density on momentum phase space (t, q, p)."""

    density: Expr
    dimension: int
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "density", as_expr(self.density))
        bad = {SymbolKind.VELOCITY, SymbolKind.ACCELERATION, SymbolKind.MOMENTUM_DOT,
               SymbolKind.HOMOGENEOUS_MOMENTUM}
        for s in free_symbols(self.density):
            if s.kind in bad:
                raise ValueError(f"Hamiltonian density cannot depend on {s}")
            if s.kind in (SymbolKind.COORD, SymbolKind.MOMENTUM) and s.index > self.dimension:
                raise ValueError(f"symbol {s} exceeds dimension {self.dimension}")


@dataclass(frozen=True)
class HamiltonVectorField:
    """Unique field transverse to the fibres annihilating the dynamics form."""

    q_dot: tuple
    p_dot: tuple


@dataclass(frozen=True)
class HomogeneousContext:
    """Autonomous extension on the homogeneous phase space.

    The function p + H generates the dynamics through the canonical bracket;
    the underlying Liouville and symplectic forms stay implicit because every
    computation factors through the bracket.
    """

    hamiltonian: Hamiltonian
    bold_h: Expr


@dataclass(frozen=True)
class PhaseSpaceLagrangian:
    """The density p_i q_t^i - H together with its two-n-dimensional avatar.

    ``extended`` treats the momenta as extra configuration coordinates
    (coordinate n+i stands for p_i), which lets all Lagrangian machinery run
    on phase-space expressions.
    """

    density: Expr
    hamiltonian: Hamiltonian
    extended: Lagrangian


def hamilton_vector_field(H: Hamiltonian) -> HamiltonVectorField:
    q_dot = tuple(diff(H.density, sy.momentum(i)) for i in range(1, H.dimension + 1))
    p_dot = tuple(neg(diff(H.density, sy.coord(i))) for i in range(1, H.dimension + 1))
    return HamiltonVectorField(q_dot, p_dot)


def hamilton_equations(H: Hamiltonian) -> List[Expr]:
    """Residuals q_t^i - dH/dp_i and p_i_t + dH/dq_i with formal jets."""
    gamma = hamilton_vector_field(H)
    out = []
    for i in range(1, H.dimension + 1):
        out.append(sub(sym(sy.velocity(i)), gamma.q_dot[i - 1]))
    for i in range(1, H.dimension + 1):
        out.append(sub(sym(sy.momentum_dot(i)), gamma.p_dot[i - 1]))
    return out


# ---------------------------------------------------------------------------
# the extended configuration space (q, p)


def to_extended(e: Expr, n: int) -> Expr:
    """Rename p_i -> q_{n+i} (and formal jets accordingly)."""
    mapping = {}
    for s in free_symbols(e):
        if s.kind == SymbolKind.MOMENTUM:
            mapping[s] = sym(sy.coord(n + s.index))
        elif s.kind == SymbolKind.MOMENTUM_DOT:
            mapping[s] = sym(sy.velocity(n + s.index))
    return substitute(e, mapping)


def from_extended(e: Expr, n: int) -> Expr:
    """Inverse renaming of to_extended."""
    mapping = {}
    for s in free_symbols(e):
        if s.kind == SymbolKind.COORD and s.index > n:
            mapping[s] = sym(sy.momentum(s.index - n))
        elif s.kind == SymbolKind.VELOCITY and s.index > n:
            mapping[s] = sym(sy.momentum_dot(s.index - n))
        elif s.kind == SymbolKind.ACCELERATION and s.index > n:
            raise ValueError("second-order jet of a momentum coordinate has no phase-space meaning")
    return substitute(e, mapping)


def lagrangian_of_H(H: Hamiltonian) -> PhaseSpaceLagrangian:
    """Phase-space Lagrangian p_i q_t^i - H; variational content verified."""
    n = H.dimension
    density = neg(H.density)
    for i in range(1, n + 1):
        density = add(density, mul(sym(sy.momentum(i)), sym(sy.velocity(i))))
    extended = Lagrangian(to_extended(density, n), 2 * n, H.params)
    el = [from_extended(e, n) for e in euler_lagrange(extended)]
    residuals = hamilton_equations(H)
    for i in range(1, n + 1):
        if el[i - 1] != neg(residuals[n + i - 1]):
            raise AssertionError("variation in q does not reproduce the momentum equation")
        if el[n + i - 1] != residuals[i - 1]:
            raise AssertionError("variation in p does not reproduce the velocity equation")
    return PhaseSpaceLagrangian(density, H, extended)


def extended_lift(u: ProjectableVectorField, n: int) -> ProjectableVectorField:
    """Canonical lift of u viewed as a generator on the (q, p) space."""
    lift = canonical_lift(u)
    comps = tuple(lift.components) + tuple(to_extended(w, n) for w in lift.momentum_components)
    return ProjectableVectorField(lift.u_t, comps, 2 * n)


def lie_derivative_hamiltonian(H: Hamiltonian, u: ProjectableVectorField) -> Expr:
    """Density of the Lie derivative of the dynamics form along the lift of u."""
    n = H.dimension
    s = neg(H.density) if u.u_t else ZERO
    for i in range(1, n + 1):
        s = add(s, mul(sym(sy.momentum(i)), u.components[i - 1]))
    out = diff(s, sy.TIME)
    for i in range(1, n + 1):
        out = sub(out, mul(u.components[i - 1], diff(H.density, sy.coord(i))))
        inner = ZERO
        for j in range(1, n + 1):
            inner = add(inner, mul(diff(u.components[j - 1], sy.coord(i)), sym(sy.momentum(j))))
        out = add(out, mul(inner, diff(H.density, sy.momentum(i))))
    return out


def verify_pullback_relation(H: Hamiltonian, u: ProjectableVectorField,
                             probes: ProbeConfig = DEFAULT_PROBES) -> ZeroVerdict:
    """The direct Lie derivative equals the one computed through L_H.

    Holds identically (off-shell): the jet terms cancel against the lift's
    momentum components.
    """
    n = H.dimension
    lh = lagrangian_of_H(H)
    through_lagrangian = from_extended(
        lie_derivative_lagrangian(lh.extended, extended_lift(u, n)), n
    )
    return is_zero(sub(through_lagrangian, lie_derivative_hamiltonian(H, u)), probes)


def first_variational_hamiltonian_check(H: Hamiltonian, u: ProjectableVectorField,
                                        probes: ProbeConfig = DEFAULT_PROBES) -> ZeroVerdict:
    """Decomposition of the phase-space Lie derivative into shell terms.

    The Lie derivative of L_H plus the bracketed combination of Hamilton
    residuals and the exact term d_t(u_t H - u^i p_i) must vanish identically.
    """
    n = H.dimension
    lh = lagrangian_of_H(H)
    lie = from_extended(lie_derivative_lagrangian(lh.extended, extended_lift(u, n)), n)
    residuals = hamilton_equations(H)
    bracket = ZERO
    for i in range(1, n + 1):
        rel = u.components[i - 1]
        if u.u_t:
            rel = sub(rel, sym(sy.velocity(i)))
        bracket = add(bracket, mul(rel, residuals[n + i - 1]))
        co = ZERO
        for j in range(1, n + 1):
            co = add(co, mul(sym(sy.momentum(j)), diff(u.components[j - 1], sy.coord(i))))
        if u.u_t:
            co = add(co, sym(sy.momentum_dot(i)))
        bracket = add(bracket, mul(co, residuals[i - 1]))
    exact = H.density if u.u_t else ZERO
    for i in range(1, n + 1):
        exact = sub(exact, mul(u.components[i - 1], sym(sy.momentum(i))))
    bracket = add(bracket, total_derivative(exact, mode="phase"))
    return is_zero(add(lie, bracket), probes)


# ---------------------------------------------------------------------------
# symmetries and charges


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(24)


class NumericTimeIntegral:
    """Quadrature fallback for the time integral of a quasi-symmetry defect."""

    dimension = 0

    def __init__(self, integrand: Expr):
        self.integrand = integrand

    def __call__(self, t: float, q=None, params=None) -> float:
        assignment = dict(params or {})
        total = 0.0
        for node, w in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
            assignment[sy.TIME] = 0.5 * t * (node + 1.0)
            total += 0.5 * t * w * evaluate(self.integrand, assignment)
        return total


def symmetry_classify_hamiltonian(
    H: Hamiltonian,
    u: ProjectableVectorField,
    probes: ProbeConfig = DEFAULT_PROBES,
    generator_name: str = "u",
) -> SymmetryReport:
    """Classify a configuration-space generator against the Hamiltonian.

    Strict when the Lie derivative vanishes; Quasi when it depends on time
    only (its time integral f then shifts the charge); Broken otherwise.
    There is no on-shell-only middle class on this side: the defect never
    touches the jet coordinates.  For Quasi reports the ``sigma`` slot holds
    the time integral f.
    """
    n = H.dimension
    lam = lie_derivative_hamiltonian(H, u)
    v0 = is_zero(lam, probes)
    charge_expr = neg(H.density) if u.u_t else ZERO
    for i in range(1, n + 1):
        charge_expr = add(charge_expr, mul(u.components[i - 1], sym(sy.momentum(i))))

    if v0.is_zero_class:
        charge = ConservedQuantity(
            f"charge_{generator_name}", charge_expr, "momentum",
            Provenance(str(u), SymmetryClass.STRICT.value,
                       "charge = u^i p_i - u_t H (sign-flipped symmetry function)"),
        )
        return SymmetryReport(SymmetryClass.STRICT, lam, v0, charge=charge)

    grads = [diff(lam, sy.coord(i)) for i in range(1, n + 1)]
    grads += [diff(lam, sy.momentum(i)) for i in range(1, n + 1)]
    time_only = weakest(is_zero(g, probes) for g in grads)
    if time_only.is_zero_class:
        f = antiderivative(lam, sy.TIME)
        if f is None:
            numeric = NumericTimeIntegral(lam)
            charge = ConservedQuantity(
                f"charge_{generator_name}", charge_expr, "momentum",
                Provenance(str(u), SymmetryClass.QUASI.value,
                           "time integral of the defect available only numerically"),
                numeric_sigma=numeric, numeric_sigma_coeff=-1,
            )
            return SymmetryReport(SymmetryClass.QUASI, lam, time_only, sigma=numeric, charge=charge)
        charge = ConservedQuantity(
            f"charge_{generator_name}", sub(charge_expr, f), "momentum",
            Provenance(str(u), SymmetryClass.QUASI.value,
                       "charge = u^i p_i - u_t H - time-integral(defect)"),
        )
        return SymmetryReport(SymmetryClass.QUASI, lam, time_only, sigma=f, charge=charge)

    confidence = v0 if v0 == ZeroVerdict.PROVEN_NONZERO else weakest([v0, time_only])
    return SymmetryReport(SymmetryClass.BROKEN, lam, confidence)


def energy_function_hamiltonian(H: Hamiltonian, gamma: ProjectableVectorField) -> ConservedQuantity:
    """Frame energy H - p_i Gamma^i."""
    if not gamma.is_connection:
        raise ValueError("energy needs a connection (time component 1)")
    expr = H.density
    for i in range(1, H.dimension + 1):
        expr = sub(expr, mul(sym(sy.momentum(i)), gamma.components[i - 1]))
    prov = Provenance(str(gamma), "energy-candidate", "conservation is settled by symmetry classification")
    return ConservedQuantity("energy", expr, "momentum", prov)


# ---------------------------------------------------------------------------
# homogeneous phase space


def homogeneous_context(H: Hamiltonian) -> HomogeneousContext:
    return HomogeneousContext(H, add(sym(sy.HOMOGENEOUS_MOMENTUM), H.density))


def poisson_bracket_T(f: Expr, g: Expr) -> Expr:
    """Canonical bracket on the homogeneous phase space (t, q, p, p_i)."""
    ph = sy.HOMOGENEOUS_MOMENTUM
    out = sub(mul(diff(f, ph), diff(g, sy.TIME)), mul(diff(f, sy.TIME), diff(g, ph)))
    indices = sorted(
        {s.index for e in (f, g) for s in free_symbols(e)
         if s.kind in (SymbolKind.COORD, SymbolKind.MOMENTUM)}
    )
    for i in indices:
        out = add(out, mul(diff(f, sy.momentum(i)), diff(g, sy.coord(i))))
        out = sub(out, mul(diff(f, sy.coord(i)), diff(g, sy.momentum(i))))
    return out


def gamma_H_applied(H: Hamiltonian, f: Expr) -> Expr:
    """Directional derivative of f along the Hamilton vector field."""
    out = diff(f, sy.TIME)
    for i in range(1, H.dimension + 1):
        out = add(out, mul(diff(H.density, sy.momentum(i)), diff(f, sy.coord(i))))
        out = sub(out, mul(diff(H.density, sy.coord(i)), diff(f, sy.momentum(i))))
    return out


def verify_gamma_bracket(H: Hamiltonian, f: Expr, probes: ProbeConfig = DEFAULT_PROBES) -> ZeroVerdict:
    """gamma_H(f) equals the homogeneous bracket of p + H with f."""
    ctx = homogeneous_context(H)
    return is_zero(sub(gamma_H_applied(H, f), poisson_bracket_T(ctx.bold_h, f)), probes)
