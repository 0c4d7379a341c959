"""Closed-form antiderivatives for polynomial-times-exponential integrands.

This is the only symbolic integration the engine needs: potentials of exact
one-forms and time integrals of quasi-symmetry defects are all sums of terms
``c * x^m * exp(a*x + b)`` with ``a``, ``b``, ``c`` free of the integration
variable.  Anything outside that class returns ``None`` and callers fall back
to numeric quadrature.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .expr import (
    ONE,
    ZERO,
    Expr,
    Fn,
    Pow,
    Sym,
    add,
    diff,
    factors_of,
    free_symbols,
    mul,
    num,
    pow_,
    sub,
    terms_of,
)
from .symbols import Symbol


def _term_profile(term: Expr, x: Symbol):
    """Split one normalized term into (const_factors, power of x, exp rate)."""
    const = []
    m = 0
    rate = None
    for f in factors_of(term):
        if x not in free_symbols(f):
            const.append(f)
            continue
        if isinstance(f, Sym) and f.symbol == x:
            m += 1
            continue
        if isinstance(f, Pow) and isinstance(f.base, Sym) and f.base.symbol == x and f.exponent > 0:
            m += f.exponent
            continue
        if isinstance(f, Fn) and f.name == "exp":
            a = diff(f.arg, x)
            if x in free_symbols(a) or rate is not None:
                return None
            # split arg = a*x + b with b free of x
            b = sub(f.arg, mul(a, Sym(x)))
            if x in free_symbols(b):
                return None
            rate = (a, b)
            continue
        return None
    return const, m, rate


def antiderivative(e: Expr, x: Symbol) -> Optional[Expr]:
    """Return F with dF/dx = e, or None if e is outside the supported class."""
    xs = Sym(x)
    parts = []
    for term in terms_of(e):
        prof = _term_profile(term, x)
        if prof is None:
            return None
        const, m, rate = prof
        c = mul(*const) if const else ONE
        if rate is None or rate[0] == ZERO:
            if rate is not None:
                c = mul(c, Fn("exp", rate[1]))
            parts.append(mul(c, num(Fraction(1, m + 1)), pow_(xs, m + 1)))
            continue
        a, b = rate
        # integration by parts:
        # int x^m e^(a x) dx = e^(a x) sum_j (-1)^j m!/(m-j)! x^(m-j) / a^(j+1)
        acc = []
        for j in range(m + 1):
            coeff = Fraction((-1) ** j * math.factorial(m), math.factorial(m - j))
            acc.append(mul(num(coeff), pow_(xs, m - j), pow_(a, -(j + 1))))
        eb = mul(Fn("exp", b), Fn("exp", mul(a, xs))) if b != ZERO else Fn("exp", mul(a, xs))
        parts.append(mul(c, eb, add(*acc)))
    return add(*parts)
