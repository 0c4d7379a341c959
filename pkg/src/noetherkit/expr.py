"""Immutable symbolic expressions over the mechanics alphabet.

Every expression is kept in a structurally normalized form: sums and products
are flattened and sorted under a total order on nodes, numeric coefficients
are merged exactly (rationals stay rational), identical bases in a product
merge into integer powers, exponential factors combine through their
arguments, and positive integer powers of sums are expanded.  Two normalized
trees are equal iff they have the same structure, which is what the symmetry
classifiers rely on for proven-zero verdicts.

Construction goes through the smart constructors ``add``/``mul``/``pow_``/
``fn``; the node classes themselves are dumb containers.
"""

from __future__ import annotations

import math
import random
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .symbols import Symbol, SymbolKind

NumberLike = Union[int, float, Fraction]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class ExprError(Exception):
    """Base class for expression-level failures."""


class EvalError(ExprError):
    """Missing assignment or domain error during numeric evaluation."""


# ---------------------------------------------------------------------------
# nodes


class Expr:
    __slots__ = ("key", "_hash")

    def __eq__(self, other):
        return isinstance(other, Expr) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return to_string(self)

    # convenience arithmetic, used heavily by the mechanics layers and tests
    def __add__(self, other):
        return add(self, as_expr(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, e):
        return pow_(self, e)

    def __neg__(self):
        return neg(self)


class Num(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value
        if isinstance(value, Fraction):
            k = (0, 0, value.numerator, value.denominator)
        else:
            k = (0, 1, value)
        self.key = k
        self._hash = hash(k)


class Sym(Expr):
    __slots__ = ("symbol",)

    def __init__(self, symbol: Symbol):
        self.symbol = symbol
        self.key = (1,) + symbol.sort_key
        self._hash = hash(self.key)


class Fn(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        self.name = name
        self.arg = arg
        self.key = (2, name, arg.key)
        self._hash = hash(self.key)


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        self.base = base
        self.exponent = exponent
        self.key = (3, base.key, exponent)
        self._hash = hash(self.key)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        self.factors = factors
        self.key = (4,) + tuple(f.key for f in factors)
        self._hash = hash(self.key)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        self.terms = terms
        self.key = (5,) + tuple(t.key for t in terms)
        self._hash = hash(self.key)


# ---------------------------------------------------------------------------
# smart constructors


def num(value: NumberLike) -> Num:
    if isinstance(value, bool):
        raise TypeError("bool is not a number")
    if isinstance(value, int):
        value = Fraction(value)
    elif isinstance(value, float):
        # floats that are exact small integers fold back into the exact lane
        if math.isfinite(value) and value == int(value) and abs(value) < 2**53:
            value = Fraction(int(value))
    elif not isinstance(value, Fraction):
        raise TypeError(f"not a number: {value!r}")
    return Num(value)


ZERO = num(0)
ONE = num(1)
MINUS_ONE = num(-1)
HALF = num(Fraction(1, 2))


def sym(s: Symbol) -> Sym:
    return Sym(s)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Symbol):
        return Sym(x)
    return num(x)


def _is_zero_num(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0


def _split_coeff(term: Expr) -> tuple:
    """Split a normalized non-Num term into (numeric coeff, monomial part)."""
    if isinstance(term, Mul) and isinstance(term.factors[0], Num):
        rest = term.factors[1:]
        mono = rest[0] if len(rest) == 1 else Mul(rest)
        return term.factors[0].value, mono
    return Fraction(1), term


def _coeff_times(c, mono: Expr) -> Expr:
    """Rebuild coeff*monomial; mono is a normalized non-Num monomial."""
    cn = num(c)
    if cn.value == 1:
        return mono
    if cn.value == 0:
        return ZERO
    if isinstance(mono, Mul):
        return Mul((cn,) + mono.factors)
    return Mul((cn, mono))


def add(*xs) -> Expr:
    terms = []
    for x in xs:
        e = as_expr(x)
        if isinstance(e, Add):
            terms.extend(e.terms)
        else:
            terms.append(e)

    const = Fraction(0)
    groups: dict = {}
    for t in terms:
        if isinstance(t, Num):
            const = const + t.value
            continue
        c, mono = _split_coeff(t)
        if mono.key in groups:
            groups[mono.key][0] = groups[mono.key][0] + c
        else:
            groups[mono.key] = [c, mono]

    out = []
    for c, mono in groups.values():
        if c == 0:
            continue
        out.append(_coeff_times(c, mono))
    if const != 0:
        out.append(num(const))
    if not out:
        return ZERO
    out.sort(key=lambda e: e.key)
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def neg(x) -> Expr:
    return mul(MINUS_ONE, as_expr(x))


def sub(a, b) -> Expr:
    return add(as_expr(a), neg(b))


def div(a, b) -> Expr:
    return mul(as_expr(a), pow_(as_expr(b), -1))


def mul(*xs) -> Expr:
    factors = []
    for x in xs:
        e = as_expr(x)
        if isinstance(e, Mul):
            factors.extend(e.factors)
        else:
            factors.append(e)

    # merge powers of identical bases first so that A*A^-1 cancels even for
    # sum-valued A, then distribute remaining positive sum powers
    coeff = Fraction(1)
    powers: dict = {}
    exp_args = []

    def push(base: Expr, e: int):
        if base.key in powers:
            powers[base.key][1] += e
        else:
            powers[base.key] = [base, e]

    for f in factors:
        if isinstance(f, Num):
            if f.value == 0:
                return ZERO
            coeff = coeff * f.value
        elif isinstance(f, Pow):
            push(f.base, f.exponent)
        elif isinstance(f, Fn) and f.name == "exp":
            exp_args.append(f.arg)
        else:
            push(f, 1)

    if exp_args:
        total = add(*exp_args)
        e = fn("exp", total)
        if isinstance(e, Num):
            coeff = coeff * e.value
        elif not _is_zero_num(total):
            push(e, 1)

    plain = []
    expand = []
    redo = False
    for base, e in powers.values():
        if e == 0:
            continue
        if isinstance(base, Add):
            if e > 0:
                expand.extend([base] * e)
            else:
                plain.append(Pow(base, e))
            continue
        if e == 1:
            plain.append(base)
            continue
        p = pow_(base, e)
        if not (isinstance(p, Pow) and p.base.key == base.key and p.exponent == e):
            redo = True  # pow_ folded something; reflatten to restore invariants
        plain.append(p)

    if expand:
        partials = [[]]
        for s in expand:
            partials = [p + [t] for p in partials for t in s.terms]
        return add(*(mul(num(coeff), *plain, *combo) for combo in partials))
    if redo:
        return mul(num(coeff), *plain)

    if not plain:
        return num(coeff)
    plain.sort(key=lambda e: e.key)
    cn = num(coeff)
    if cn.value == 1:
        if len(plain) == 1:
            return plain[0]
        return Mul(tuple(plain))
    return Mul((cn,) + tuple(plain))


def pow_(base, e: int) -> Expr:
    base = as_expr(base)
    if isinstance(e, bool) or not isinstance(e, int):
        raise TypeError("exponent must be an integer")
    if e == 0:
        return ONE
    if e == 1:
        return base
    if isinstance(base, Num):
        v = base.value
        if v == 0:
            if e < 0:
                raise EvalError("division by zero in constant power")
            return ZERO
        if isinstance(v, Fraction):
            return num(v**e)
        return num(v**e if e >= 0 else 1.0 / v ** (-e))
    if isinstance(base, Mul):
        return mul(*(pow_(f, e) for f in base.factors))
    if isinstance(base, Pow):
        return pow_(base.base, base.exponent * e)
    if isinstance(base, Fn):
        if base.name == "exp":
            return fn("exp", mul(num(e), base.arg))
        if base.name == "sqrt":
            half, r = divmod(e, 2)
            inner = pow_(base.arg, half) if half else ONE
            return mul(inner, base) if r else inner
    if isinstance(base, Add) and e > 0:
        out = base
        for _ in range(e - 1):
            out = mul(out, base)
        return out
    return Pow(base, e)


def _sqrt_fraction(v: Fraction):
    ns = math.isqrt(v.numerator)
    ds = math.isqrt(v.denominator)
    if ns * ns == v.numerator and ds * ds == v.denominator:
        return Fraction(ns, ds)
    return None


def fn(name: str, arg) -> Expr:
    arg = as_expr(arg)
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if isinstance(arg, Num):
        v = arg.value
        if isinstance(v, float):
            try:
                return num(getattr(math, name)(v))
            except (ValueError, OverflowError) as exc:
                raise EvalError(f"{name}({v}) domain error") from exc
        # exact special values only; other exact arguments stay symbolic
        if v == 0:
            if name == "log":
                raise EvalError("log(0) is undefined")
            return {"sin": ZERO, "cos": ONE, "exp": ONE, "sqrt": ZERO}[name]
        if name == "log" and v == 1:
            return ZERO
        if name == "sqrt":
            if v < 0:
                raise EvalError("sqrt of negative constant")
            r = _sqrt_fraction(v)
            if r is not None:
                return num(r)
    return Fn(name, arg)


def normalize(e: Expr) -> Expr:
    """Rebuild through the smart constructors (idempotent by construction)."""
    if isinstance(e, (Num, Sym)):
        return e
    if isinstance(e, Fn):
        return fn(e.name, normalize(e.arg))
    if isinstance(e, Pow):
        return pow_(normalize(e.base), e.exponent)
    if isinstance(e, Mul):
        return mul(*(normalize(f) for f in e.factors))
    if isinstance(e, Add):
        return add(*(normalize(t) for t in e.terms))
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# structure queries


def terms_of(e: Expr) -> tuple:
    return e.terms if isinstance(e, Add) else (e,)


def factors_of(e: Expr) -> tuple:
    return e.factors if isinstance(e, Mul) else (e,)


def split_coeff(term: Expr) -> tuple:
    """(numeric coefficient, monomial Expr) of a normalized term."""
    if isinstance(term, Num):
        return term.value, ONE
    return _split_coeff(term)


def free_symbols(e: Expr) -> frozenset:
    out = set()
    stack = [e]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Sym):
            out.add(cur.symbol)
        elif isinstance(cur, Fn):
            stack.append(cur.arg)
        elif isinstance(cur, Pow):
            stack.append(cur.base)
        elif isinstance(cur, Mul):
            stack.extend(cur.factors)
        elif isinstance(cur, Add):
            stack.extend(cur.terms)
    return frozenset(out)


def contains_kind(e: Expr, *kinds: SymbolKind) -> bool:
    ks = set(kinds)
    return any(s.kind in ks for s in free_symbols(e))


def symbols_of_kind(e: Expr, kind: SymbolKind) -> list:
    return sorted((s for s in free_symbols(e) if s.kind == kind), key=lambda s: s.sort_key)


# ---------------------------------------------------------------------------
# calculus and evaluation


def diff(e: Expr, s: Symbol) -> Expr:
    """Exact partial derivative treating all other symbols as independent."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.symbol == s else ZERO
    if isinstance(e, Add):
        return add(*(diff(t, s) for t in e.terms))
    if isinstance(e, Mul):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            d = diff(f, s)
            if _is_zero_num(d):
                continue
            parts.append(mul(*fs[:i], d, *fs[i + 1 :]))
        return add(*parts) if parts else ZERO
    if isinstance(e, Pow):
        d = diff(e.base, s)
        if _is_zero_num(d):
            return ZERO
        return mul(num(e.exponent), pow_(e.base, e.exponent - 1), d)
    if isinstance(e, Fn):
        d = diff(e.arg, s)
        if _is_zero_num(d):
            return ZERO
        if e.name == "sin":
            outer = fn("cos", e.arg)
        elif e.name == "cos":
            outer = neg(fn("sin", e.arg))
        elif e.name == "exp":
            outer = e
        elif e.name == "log":
            outer = pow_(e.arg, -1)
        else:  # sqrt
            outer = mul(HALF, pow_(e, -1))
        return mul(outer, d)
    raise TypeError(f"not an Expr: {e!r}")


def evaluate(e: Expr, assignment: Mapping[Symbol, float]) -> float:
    """Real evaluation; raises EvalError on missing symbols or domain errors."""
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Sym):
        try:
            return float(assignment[e.symbol])
        except KeyError:
            raise EvalError(f"no value assigned to symbol {e.symbol}") from None
    if isinstance(e, Add):
        return sum(evaluate(t, assignment) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= evaluate(f, assignment)
        return out
    if isinstance(e, Pow):
        b = evaluate(e.base, assignment)
        try:
            return b**e.exponent if e.exponent >= 0 else 1.0 / b ** (-e.exponent)
        except (ZeroDivisionError, OverflowError) as exc:
            raise EvalError(f"power evaluation failed: {b}^{e.exponent}") from exc
    if isinstance(e, Fn):
        v = evaluate(e.arg, assignment)
        try:
            return getattr(math, e.name)(v)
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"{e.name}({v}) domain error") from exc
    raise TypeError(f"not an Expr: {e!r}")


def substitute(e: Expr, mapping: Mapping[Symbol, Expr]) -> Expr:
    """Simultaneous substitution of symbols, then normalization."""
    if not mapping:
        return e
    table = {s: as_expr(v) for s, v in mapping.items()}

    def walk(cur: Expr) -> Expr:
        if isinstance(cur, Num):
            return cur
        if isinstance(cur, Sym):
            return table.get(cur.symbol, cur)
        if isinstance(cur, Fn):
            return fn(cur.name, walk(cur.arg))
        if isinstance(cur, Pow):
            return pow_(walk(cur.base), cur.exponent)
        if isinstance(cur, Mul):
            return mul(*(walk(f) for f in cur.factors))
        if isinstance(cur, Add):
            return add(*(walk(t) for t in cur.terms))
        raise TypeError(f"not an Expr: {cur!r}")

    return walk(e)


# ---------------------------------------------------------------------------
# printing


def _num_str(v) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    return repr(v)


def _atom_str(e: Expr) -> str:
    """Render e in a position the grammar treats as an atom."""
    s = to_string(e)
    if isinstance(e, (Add, Mul, Pow)):
        return f"({s})"
    if isinstance(e, Num) and (s.startswith("-") or "/" in s):
        return f"({s})"
    return s


def _factor_str(e: Expr) -> str:
    if isinstance(e, Pow):
        return f"{_atom_str(e.base)}^{e.exponent}"
    if isinstance(e, (Sym, Fn)):
        return to_string(e)
    return f"({to_string(e)})"


def _term_sign_body(e: Expr) -> tuple:
    """(sign, printed magnitude) of a normalized term, for sum rendering."""
    if isinstance(e, Num):
        v = e.value
        return (1 if v >= 0 else -1), _num_str(abs(v))
    if isinstance(e, Mul):
        fs = e.factors
        sign = 1
        if isinstance(fs[0], Num):
            c = fs[0].value
            sign = 1 if c >= 0 else -1
            body = "*".join(_factor_str(f) for f in fs[1:])
            if abs(c) != 1:
                body = f"{_num_str(abs(c))}*{body}"
            return sign, body
        return 1, "*".join(_factor_str(f) for f in fs)
    return 1, _factor_str(e)


def to_string(e: Expr) -> str:
    """Canonical printed form; print-then-parse is the identity."""
    if isinstance(e, Num):
        return _num_str(e.value)
    if isinstance(e, Sym):
        return str(e.symbol)
    if isinstance(e, Fn):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Pow):
        return f"{_atom_str(e.base)}^{e.exponent}"
    if isinstance(e, Mul):
        sign, body = _term_sign_body(e)
        return body if sign > 0 else f"-{body}"
    if isinstance(e, Add):
        sign, body = _term_sign_body(e.terms[0])
        out = [body if sign > 0 else f"-{body}"]
        for t in e.terms[1:]:
            sign, body = _term_sign_body(t)
            out.append(f" + {body}" if sign > 0 else f" - {body}")
        return "".join(out)
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# zero testing


class ZeroVerdict(Enum):
    PROVEN_ZERO = "ProvenZero"
    NUMERICALLY_ZERO = "NumericallyZero"
    PROVEN_NONZERO = "ProvenNonzero"
    UNKNOWN = "Unknown"

    @property
    def strength(self) -> int:
        return _STRENGTH[self]

    @property
    def is_zero_class(self) -> bool:
        return self in (ZeroVerdict.PROVEN_ZERO, ZeroVerdict.NUMERICALLY_ZERO)

    def __str__(self):
        return self.value


_STRENGTH = {
    ZeroVerdict.PROVEN_ZERO: 3,
    ZeroVerdict.NUMERICALLY_ZERO: 2,
    ZeroVerdict.UNKNOWN: 1,
    ZeroVerdict.PROVEN_NONZERO: 0,
}


def weakest(verdicts: Iterable[ZeroVerdict]) -> ZeroVerdict:
    """Combine per-component verdicts into the confidence that all vanish."""
    vs = list(verdicts)
    if not vs:
        return ZeroVerdict.PROVEN_ZERO
    return min(vs, key=lambda v: v.strength)


class ProbeConfig:
    """Deterministic sampling used by the probabilistic zero test."""

    __slots__ = ("seed", "n_points", "low", "high", "zero_tol", "nonzero_tol", "max_draws")

    def __init__(self, seed=42, n_points=20, low=-2.0, high=2.0, zero_tol=1e-9, nonzero_tol=1e-6, max_draws=400):
        self.seed = seed
        self.n_points = n_points
        self.low = low
        self.high = high
        self.zero_tol = zero_tol
        self.nonzero_tol = nonzero_tol
        self.max_draws = max_draws


DEFAULT_PROBES = ProbeConfig()


def probe_values(e: Expr, probes: ProbeConfig = DEFAULT_PROBES) -> list:
    """Evaluate e at pseudo-random points, skipping singular draws."""
    syms = sorted(free_symbols(e), key=lambda s: s.sort_key)
    rng = random.Random(probes.seed)
    values = []
    draws = 0
    while len(values) < probes.n_points and draws < probes.max_draws:
        draws += 1
        point = {s: rng.uniform(probes.low, probes.high) for s in syms}
        try:
            v = evaluate(e, point)
        except EvalError:
            continue
        if not math.isfinite(v):
            continue
        values.append(v)
        if not syms:
            break  # constant expression: one evaluation tells everything
    return values


def is_zero(e: Expr, probes: ProbeConfig = DEFAULT_PROBES) -> ZeroVerdict:
    """Two-tier zero test: structural first, then probabilistic numeric."""
    if _is_zero_num(e):
        return ZeroVerdict.PROVEN_ZERO
    values = probe_values(e, probes)
    if not values:
        return ZeroVerdict.UNKNOWN
    if all(abs(v) < probes.zero_tol for v in values):
        return ZeroVerdict.NUMERICALLY_ZERO
    if any(abs(v) > probes.nonzero_tol for v in values):
        return ZeroVerdict.PROVEN_NONZERO
    return ZeroVerdict.UNKNOWN
