"""Variational operators, symmetry classification, Noether charges."""

import random

import pytest

from conftest import random_point, seeded
from noetherkit import symbols as sy
from noetherkit.expr import (
    ZERO,
    ZeroVerdict,
    add,
    diff,
    evaluate,
    free_symbols,
    is_zero,
    mul,
    neg,
    sub,
    sym,
)
from noetherkit.jet import ProjectableVectorField, h0, total_derivative
from noetherkit.lagrangian import (
    DegenerateLagrangianError,
    Lagrangian,
    SymmetryClass,
    annihilator_check,
    energy_function,
    euler_lagrange,
    find_symmetries,
    first_variational_check,
    interior_product,
    is_variationally_trivial,
    lie_derivative_lagrangian,
    momentum_function,
    noether_charge,
    on_shell_reduce,
    poincare_cartan,
    symmetry_classify,
    velocity_hessian,
)
from noetherkit.linsolve import rref
from noetherkit.parse import parse

PARAMS = ("k", "v")


def P(text, n=1):
    return parse(text, n, PARAMS)


def lag(text, n=1):
    return Lagrangian(P(text, n), n, PARAMS)


def vf(u_t, *components):
    n = len(components)
    comps = tuple(parse(c, n, PARAMS) if isinstance(c, str) else c for c in components)
    return ProjectableVectorField(u_t, comps, n)


FRICTION = lag("0.5*exp(k*t)*q1_t^2")
FREE = lag("0.5*q1_t^2")
HARMONIC = lag("0.5*q1_t^2 - 0.5*q1^2")
GAMMA_FRICTION = vf(1, "-(k/2)*q1")
BOOST = vf(0, "v*t")


class TestEulerLagrange:
    def test_friction(self):
        (el,) = euler_lagrange(FRICTION)
        assert el == P("-exp(k*t)*(q1_tt + k*q1_t)")

    def test_free(self):
        assert euler_lagrange(FREE) == [P("-q1_tt")]

    def test_total_derivative_lagrangian_is_trivial(self):
        # h0 of d(t*q1): EL must vanish identically
        assert euler_lagrange(lag("q1 + t*q1_t")) == [ZERO]


class TestPoincareCartan:
    def test_free(self):
        assert poincare_cartan(FREE).momenta_part == (P("q1_t"),)

    def test_friction(self):
        assert poincare_cartan(FRICTION).momenta_part == (P("exp(k*t)*q1_t"),)

    def test_velocity_independent(self):
        assert poincare_cartan(lag("q1^2 - t")).momenta_part == (ZERO,)


class TestLieDerivative:
    def test_friction_frame_is_invariant(self):
        assert lie_derivative_lagrangian(FRICTION, GAMMA_FRICTION) == ZERO

    def test_galilei_boost(self):
        assert lie_derivative_lagrangian(FREE, BOOST) == P("v*q1_t")

    def test_zero_field(self):
        assert lie_derivative_lagrangian(FRICTION, vf(0, "0")) == ZERO


class TestFirstVariational:
    def test_randomized_polynomial_suite(self):
        rng = seeded(2024)
        for _ in range(30):
            n = rng.choice([1, 2])
            L = Lagrangian(_random_poly(rng, n, 3), n)
            u = ProjectableVectorField(
                rng.choice([0, 1]),
                tuple(_random_poly(rng, n, 2, velocities=False) for _ in range(n)),
                n,
            )
            rep = first_variational_check(L, u)
            assert rep.residual_verdict == ZeroVerdict.PROVEN_ZERO

    def test_friction_decomposition(self):
        rep = first_variational_check(FRICTION, GAMMA_FRICTION)
        # the Lie derivative vanishes, so the two parts cancel exactly
        assert rep.residual_verdict == ZeroVerdict.PROVEN_ZERO
        assert add(rep.euler_term, rep.boundary_term) == ZERO
        expected_euler = mul(
            P("q1_t + (k/2)*q1"), P("exp(k*t)*(q1_tt + k*q1_t)")
        )
        assert rep.euler_term == expected_euler

    def test_zero_lagrangian(self):
        rep = first_variational_check(Lagrangian(ZERO, 1), vf(1, "q1"))
        assert rep.euler_term == ZERO
        assert rep.boundary_term == ZERO
        assert rep.residual_verdict == ZeroVerdict.PROVEN_ZERO


class TestSymmetryClassify:
    def test_galilei_boost_is_quasi(self):
        rep = symmetry_classify(FREE, BOOST, generator_name="boost")
        assert rep.sym_class == SymmetryClass.QUASI
        assert rep.phi.phi_t == ZERO
        assert rep.phi.phi_i == (P("v"),)
        assert rep.sigma == P("v*q1")
        assert rep.charge.expression == P("v*(t*q1_t - q1)")

    def test_friction_frame_is_strict(self):
        rep = symmetry_classify(FRICTION, GAMMA_FRICTION, generator_name="gamma")
        assert rep.sym_class == SymmetryClass.STRICT
        assert rep.verdict_confidence == ZeroVerdict.PROVEN_ZERO
        assert rep.charge.expression == P("0.5*exp(k*t)*q1_t*(q1_t + k*q1)")

    def test_scaling_field_is_broken(self):
        rep = symmetry_classify(FREE, vf(0, "q1"))
        assert rep.sym_class == SymmetryClass.BROKEN
        assert rep.charge is None

    def test_annihilator_shift_is_on_shell_only(self):
        # degenerate two-dimensional L without q2 velocity: u = q1_t-free shift
        L = Lagrangian(parse("0.5*q1_t^2 - q2", 2), 2)
        u = ProjectableVectorField(0, (ZERO, parse("q1", 2)), 2)
        rep = symmetry_classify(L, u)
        # Lie derivative = q1 * dL/dq2 = -q1, nonzero and not affine-exact
        assert rep.sym_class == SymmetryClass.BROKEN

    def test_on_shell_only_regular_case(self):
        # harmonic oscillator: u = q1_t-independent field chosen so the
        # defect is proportional to the equation of motion
        # L = q1_t*q1 has EL identically... use instead friction + vertical
        # annihilator-free example: defect reduces on shell
        L = Lagrangian(parse("0.5*q1_t^2 + 0.5*q1^2*0", 1), 1)
        # u with Lie derivative q1_t^2 is broken; craft on-shell-only via sum
        rep = symmetry_classify(L, vf(0, "t"))
        # Lie derivative = d_t(t)*q1_t = q1_t: affine with phi = dq1, closed
        assert rep.sym_class == SymmetryClass.QUASI
        assert rep.sigma == P("q1")


class TestCharges:
    def test_friction_energy_matches_classification_charge(self):
        rep = symmetry_classify(FRICTION, GAMMA_FRICTION)
        assert energy_function(FRICTION, GAMMA_FRICTION).expression == rep.charge.expression

    def test_translation_momentum(self):
        rep = symmetry_classify(FREE, vf(0, "1"))
        assert rep.sym_class == SymmetryClass.STRICT
        assert rep.charge.expression == P("q1_t")

    def test_energy_rejects_vertical(self):
        with pytest.raises(ValueError):
            energy_function(FREE, vf(0, "1"))

    def test_momentum_rejects_connection(self):
        with pytest.raises(ValueError):
            momentum_function(FREE, vf(1, "0"))

    def test_free_energy(self):
        assert energy_function(FREE, vf(1, "0")).expression == P("0.5*q1_t^2")

    def test_harmonic_energy(self):
        got = energy_function(HARMONIC, vf(1, "0")).expression
        assert got == P("0.5*q1_t^2 + 0.5*q1^2")

    def test_rotation_momentum(self):
        L = Lagrangian(parse("0.5*(q1_t^2 + q2_t^2) - 0.5*(q1^2 + q2^2)", 2), 2)
        rot = ProjectableVectorField(0, (parse("-q2", 2), parse("q1", 2)), 2)
        got = momentum_function(L, rot).expression
        assert got == parse("q1*q2_t - q2*q1_t", 2)

    def test_velocity_free_lagrangian_momentum(self):
        assert momentum_function(lag("q1^2"), vf(0, "q1")).expression == ZERO

    def test_paper_sign_additivity(self):
        # energy of (Gamma + v) = energy of Gamma + (-momentum of v),
        # both sides as stored expressions
        gamma, v = vf(1, "0"), vf(0, "1")
        shifted = vf(1, "1")
        lhs = energy_function(FREE, shifted).expression
        rhs = sub(energy_function(FREE, gamma).expression, momentum_function(FREE, v).expression)
        assert lhs == rhs

    def test_broken_has_no_charge(self):
        rep = symmetry_classify(FREE, vf(0, "q1"))
        with pytest.raises(ValueError):
            noether_charge(FREE, vf(0, "q1"), rep)


class TestVariationalTriviality:
    def test_h0_of_exact_form(self):
        rep = is_variationally_trivial(lag("q1 + t*q1_t"))
        assert rep.verdict == ZeroVerdict.PROVEN_ZERO
        assert rep.phi is not None
        assert rep.phi.phi_t == P("q1")
        assert rep.phi.phi_i == (P("t"),)

    def test_free_not_trivial(self):
        rep = is_variationally_trivial(FREE)
        assert rep.verdict == ZeroVerdict.PROVEN_NONZERO

    def test_constant_lagrangian(self):
        rep = is_variationally_trivial(lag("1"))
        assert rep.verdict == ZeroVerdict.PROVEN_ZERO
        assert rep.phi.phi_t == P("1")


class TestAnnihilator:
    def test_missing_velocity_direction(self):
        L = Lagrangian(parse("0.5*q1_t^2", 2), 2)
        u = ProjectableVectorField(0, (ZERO, parse("1", 2)), 2)
        assert annihilator_check(L, u) == ZeroVerdict.PROVEN_ZERO

    def test_full_kinetic_term(self):
        L = Lagrangian(parse("0.5*(q1_t^2 + q2_t^2)", 2), 2)
        u = ProjectableVectorField(0, (ZERO, parse("1", 2)), 2)
        assert annihilator_check(L, u) == ZeroVerdict.PROVEN_NONZERO

    def test_zero_field(self):
        assert annihilator_check(FREE, vf(0, "0")) == ZeroVerdict.PROVEN_ZERO


class TestOnShellReduce:
    def test_free_kinetic_rate(self):
        e = total_derivative(P("0.5*q1_t^2"))
        assert on_shell_reduce(e, FREE) == ZERO

    def test_friction_charge_is_conserved(self):
        charge = symmetry_classify(FRICTION, GAMMA_FRICTION).charge
        rate = total_derivative(charge.expression)
        assert on_shell_reduce(rate, FRICTION) == ZERO

    def test_no_accelerations_unchanged(self):
        e = P("q1_t*q1")
        assert on_shell_reduce(e, FREE) is e

    def test_degenerate_rejected(self):
        L = Lagrangian(parse("0.5*q1_t^2", 2), 2)
        e = parse("q2_tt", 2)
        with pytest.raises(DegenerateLagrangianError, match="degenerate"):
            on_shell_reduce(e, L)

    def test_boost_charge_conserved(self):
        charge = symmetry_classify(FREE, BOOST).charge
        rate = total_derivative(charge.expression)
        assert on_shell_reduce(rate, FREE) == ZERO


class TestEulerLagrangeOfLieDerivative:
    """The Lie derivative is variationally trivial iff strict or quasi."""

    @pytest.mark.parametrize(
        "L,u,expect_trivial",
        [
            (FRICTION, GAMMA_FRICTION, True),
            (FREE, BOOST, True),
            (FREE, None, False),  # placeholder replaced below
        ],
    )
    def test_cases(self, L, u, expect_trivial):
        if u is None:
            u = vf(0, "q1")
        lam = lie_derivative_lagrangian(L, u)
        el = euler_lagrange(Lagrangian(lam, L.dimension, L.params))
        trivial = all(is_zero(e).is_zero_class for e in el)
        assert trivial == expect_trivial
        rep = symmetry_classify(L, u)
        assert trivial == (rep.sym_class in (SymmetryClass.STRICT, SymmetryClass.QUASI))


class TestFindSymmetries:
    def test_two_dimensional_free_particle(self):
        L = Lagrangian(parse("0.5*(q1_t^2 + q2_t^2)", 2), 2)
        fields = find_symmetries(L, u_t=0, degree=1)
        assert len(fields) >= 3
        for f in fields:
            assert symmetry_classify(L, f).sym_class == SymmetryClass.STRICT
        # translations and the rotation lie in the returned span
        vecs = [_coeff_vector(f, L.dimension, 1) for f in fields]
        for target in [
            ProjectableVectorField(0, (parse("1", 2), parse("0", 2)), 2),
            ProjectableVectorField(0, (parse("0", 2), parse("1", 2)), 2),
            ProjectableVectorField(0, (parse("-q2", 2), parse("q1", 2)), 2),
        ]:
            assert _in_span(vecs, _coeff_vector(target, 2, 1))

    def test_friction_connection_search(self):
        fields = find_symmetries(FRICTION, u_t=1, degree=1)
        assert fields, "expected a strict connection"
        gamma = fields[0]
        assert gamma.u_t == 1
        assert gamma.components == (P("-(k/2)*q1"),)
        # vertical remainder of the family: the coordinate shift
        assert any(f.is_vertical and f.components == (P("1"),) for f in fields[1:])

    def test_harmonic_constant_shift_fails(self):
        fields = find_symmetries(HARMONIC, u_t=0, degree=0)
        assert fields == []

    def test_non_polynomial_atoms_handled(self):
        fields = find_symmetries(lag("exp(q1)"), u_t=0, degree=1)
        assert fields == []

    def test_degree_guard(self):
        with pytest.raises(ValueError, match="degree"):
            find_symmetries(FREE, u_t=0, degree=4)


# ---------------------------------------------------------------------------
# helpers


def _random_poly(rng, n, degree, velocities=True):
    """Random polynomial with small rational coefficients."""
    gens = [sym(sy.TIME)] + [sym(sy.coord(i)) for i in range(1, n + 1)]
    if velocities:
        gens += [sym(sy.velocity(i)) for i in range(1, n + 1)]
    import itertools

    terms = []
    pool = [()] + [c for d in range(1, degree + 1) for c in itertools.combinations_with_replacement(range(len(gens)), d)]
    for combo in pool:
        if rng.random() < 0.5:
            continue
        coeff = rng.randint(-3, 3)
        if coeff == 0:
            continue
        terms.append(mul(coeff, *(gens[i] for i in combo)))
    return add(*terms) if terms else ZERO


def _coeff_vector(f: ProjectableVectorField, n: int, degree: int):
    """Coefficients of the components over the monomial basis, exact."""
    from noetherkit.lagrangian import _monomials

    monos = _monomials(n, degree)
    return [_poly_coefficient(comp, m, n) for comp in f.components for m in monos]


def _poly_coefficient(e, mono, n):
    """Coefficient of a squarefree monomial in (t, q); degree <= 1 bases."""
    from noetherkit.expr import factors_of, substitute

    work = e
    for f in factors_of(mono):
        if hasattr(f, "symbol"):
            work = diff(work, f.symbol)
    zero_at = {s: ZERO for s in [sy.TIME] + [sy.coord(i) for i in range(1, n + 1)]}
    return substitute(work, zero_at)


def _in_span(vectors, target):
    """Exact rank test: target in span(vectors)."""
    rows = [list(v) for v in vectors]
    _, pivots = rref(rows)
    _, pivots2 = rref(rows + [list(target)])
    return len(pivots) == len(pivots2)
