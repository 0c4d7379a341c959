"""Jet operators: total derivative, prolongations, lifts, one-forms."""

import math

import pytest

from conftest import central_difference, random_point, seeded
from noetherkit import symbols as sy
from noetherkit.expr import (
    ONE,
    ZERO,
    ZeroVerdict,
    add,
    diff,
    evaluate,
    free_symbols,
    is_zero,
    mul,
    sub,
    sym,
)
from noetherkit.jet import (
    ModeError,
    NumericPotential,
    OneFormOnQ,
    ProjectableVectorField,
    canonical_lift,
    exact_potential,
    exterior_derivative_coeffs,
    h0,
    is_closed,
    prolong1,
    prolong2,
    total_derivative,
)
from noetherkit.parse import parse

K = sy.parameter("k")
T = sy.TIME


def P(text, n=1, params=("k", "v")):
    return parse(text, n, params)


def vf(u_t, *components, params=("k", "v")):
    comps = tuple(parse(c, len(components), params) if isinstance(c, str) else c for c in components)
    return ProjectableVectorField(u_t, comps, len(components))


def oneform(phi_t, *phi_i, params=("k", "v")):
    n = len(phi_i)
    conv = lambda x: parse(x, n, params) if isinstance(x, str) else x
    return OneFormOnQ(conv(phi_t), tuple(conv(c) for c in phi_i), n)


class TestTotalDerivative:
    def test_coordinate(self):
        assert total_derivative(P("q1")) == P("q1_t")

    def test_friction_momentum_rate(self):
        got = total_derivative(P("exp(k*t)*q1_t"))
        want = P("k*exp(k*t)*q1_t + exp(k*t)*q1_tt")
        assert got == want
        # product-rule oracle: d/dt of f*g at points along a quadratic path
        rng = seeded(5)
        for _ in range(5):
            k, t, c1, c2 = (rng.uniform(0.2, 1.0) for _ in range(4))
            # path q(t) = c1*t + c2*t^2 so q_t = c1 + 2 c2 t, q_tt = 2 c2
            pt = {K: k, T: t, sy.velocity(1): c1 + 2 * c2 * t, sy.acceleration(1): 2 * c2,
                  sy.coord(1): c1 * t + c2 * t * t}
            h = 1e-6
            up = {K: k, T: t + h, sy.velocity(1): c1 + 2 * c2 * (t + h)}
            dn = {K: k, T: t - h, sy.velocity(1): c1 + 2 * c2 * (t - h)}
            e = P("exp(k*t)*q1_t")
            fd = (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
            assert evaluate(got, pt) == pytest.approx(fd, rel=1e-6)

    def test_boost_potential_rate(self):
        assert total_derivative(P("v*q1")) == P("v*q1_t")

    def test_phase_mode(self):
        got = total_derivative(P("p1*q1"), mode="phase")
        expected = add(mul(sym(sy.momentum(1)), sym(sy.velocity(1))),
                       mul(sym(sy.momentum_dot(1)), sym(sy.coord(1))))
        assert got == expected

    def test_mode_mismatch(self):
        with pytest.raises(ModeError):
            total_derivative(P("p1*q1"), mode="velocity")
        with pytest.raises(ModeError):
            total_derivative(P("q1_t"), mode="phase")


class TestProlongations:
    def test_friction_frame(self):
        gamma = vf(1, "-(k/2)*q1")
        j1 = prolong1(gamma)
        assert j1.vel_components == (P("-(k/2)*q1_t"),)

    def test_galilei_boost(self):
        u = vf(0, "v*t")
        j1 = prolong1(u)
        assert j1.vel_components == (P("v"),)

    def test_constant_field(self):
        u = vf(0, "1")
        assert prolong1(u).vel_components == (ZERO,)
        assert prolong2(u).acc_components == (ZERO,)

    def test_second_order_boost(self):
        u = vf(0, "v*t")
        assert prolong2(u).acc_components == (ZERO,)

    def test_second_order_friction(self):
        gamma = vf(1, "-(k/2)*q1")
        assert prolong2(gamma).acc_components == (P("-(k/2)*q1_tt"),)

    def test_time_component_validation(self):
        with pytest.raises(ValueError):
            ProjectableVectorField(2, (ZERO,), 1)
        with pytest.raises(ValueError, match="t, q"):
            ProjectableVectorField(0, (P("q1_t"),), 1)


class TestCanonicalLift:
    def test_translation(self):
        lift = canonical_lift(vf(0, "1"))
        assert lift.momentum_components == (ZERO,)

    def test_friction_frame(self):
        lift = canonical_lift(vf(1, "-(k/2)*q1"))
        assert lift.momentum_components == (P("(k/2)*p1"),)

    def test_boost(self):
        lift = canonical_lift(vf(0, "v*t"))
        assert lift.momentum_components == (ZERO,)

    def test_rotation_momenta_linear_homogeneous_in_p(self):
        rot = ProjectableVectorField(0, (P("-q2", 2), P("q1", 2)), 2)
        lift = canonical_lift(rot)
        for w in lift.momentum_components:
            for j in (1, 2):
                assert diff(diff(w, sy.momentum(j)), sy.momentum(j)) == ZERO
            at_zero = w
            for j in (1, 2):
                from noetherkit.expr import substitute

                at_zero = substitute(at_zero, {sy.momentum(j): ZERO})
            assert at_zero == ZERO

    def test_preserves_base_components(self):
        u = vf(1, "k*q1 + t")
        lift = canonical_lift(u)
        assert lift.u_t == 1
        assert lift.components == u.components


class TestHorizontalOperator:
    def test_boost_form(self):
        assert h0(oneform("0", "v")) == P("v*q1_t")

    def test_dt(self):
        assert h0(oneform("1", "0")) == ONE

    def test_mixed(self):
        assert h0(oneform("q1", "t")) == P("q1 + t*q1_t")

    def test_commutes_with_total_derivative(self):
        # d_t(f) = h0(df) for functions on Q
        for text in ["t*q1", "q1^2 - t^3", "exp(k*t)*q1", "sin(q1)*cos(t)"]:
            f = P(text)
            assert total_derivative(f) == h0(exterior_derivative_coeffs(f, 1))


class TestClosedness:
    def test_constant_form_closed(self):
        assert is_closed(oneform("0", "v")) == ZeroVerdict.PROVEN_ZERO

    def test_q_dt_not_closed(self):
        assert is_closed(oneform("q1", "0")) == ZeroVerdict.PROVEN_NONZERO

    def test_exact_polynomial_closed(self):
        assert is_closed(oneform("q1", "t")) == ZeroVerdict.PROVEN_ZERO

    def test_two_dimensional_rotation_form(self):
        phi = oneform("0", "-q2", "q1")  # d(q1 dq2 - ...), not closed
        assert is_closed(phi) == ZeroVerdict.PROVEN_NONZERO


class TestExactPotential:
    def test_boost(self):
        sigma = exact_potential(oneform("0", "v"))
        assert sigma == P("v*q1")

    def test_bilinear(self):
        sigma = exact_potential(oneform("q1", "t"))
        assert sigma == P("t*q1")

    def test_zero_form(self):
        assert exact_potential(oneform("0", "0")) == ZERO

    def test_exponential_polynomial(self):
        # phi = d(exp(k*t)*q1)
        phi = oneform("k*exp(k*t)*q1", "exp(k*t)")
        sigma = exact_potential(phi)
        assert sigma == P("exp(k*t)*q1")

    def test_reproduces_form_after_differentiation(self):
        phi = oneform("2*t*q1 + 1", "t^2 + 3*q1^2")
        sigma = exact_potential(phi)
        back = exterior_derivative_coeffs(sigma, 1)
        assert back.phi_t == phi.phi_t
        assert back.phi_i == phi.phi_i

    def test_numeric_fallback(self):
        # phi = d(log(2 + t^2)): rational coefficients, outside the symbolic class
        phi = oneform("2*t*(2 + t^2)^-1", "0")
        sigma = exact_potential(phi)
        assert isinstance(sigma, NumericPotential)
        got = sigma(1.5, [0.7])
        want = math.log(2 + 1.5**2) - math.log(2.0)
        assert got == pytest.approx(want, rel=1e-10)
