"""Exact commutative polynomials over the rationals in x^1..x^N, p_1..p_N.

Exponent vectors have length 2N and list the x-exponents first, then the
p-exponents.  Coefficients are GMP rationals (``gmpy2.mpq``), never floats;
:class:`fractions.Fraction`, ints and "a/b" strings are accepted on input.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq as Rational

RATIONAL_TYPES = (int, Fraction, type(Rational(0)))

Exp = tuple


def as_rational(value):
    """Coerce ints, Fractions and "a/b" strings to an exact rational (no floats)."""
    if isinstance(value, float):
        raise TypeError("floating-point coefficients are not supported")
    if isinstance(value, Fraction):
        return Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Rational(value.strip())
        except ValueError:
            raise ValueError(f"not an exact rational literal: {value!r}") from None
    if isinstance(value, RATIONAL_TYPES):
        return Rational(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


class BasePoly:
    """An immutable polynomial with rational coefficients.

    ``terms`` maps exponent tuples of length ``2 * n`` to nonzero rationals.
    """

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Exp, object] | None = None):
        if n < 1:
            raise ValueError("chart half-dimension must be positive")
        self.n = n
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != 2 * n or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for N={n}")
            c = as_rational(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
                if not clean[exp]:
                    del clean[exp]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "BasePoly":
        # trusted constructor: terms already clean
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = terms
        obj._hash = None
        return obj

    # constructors

    @classmethod
    def zero(cls, n: int) -> "BasePoly":
        return cls._raw(n, {})

    @classmethod
    def const(cls, n: int, c) -> "BasePoly":
        c = as_rational(c)
        return cls._raw(n, {(0,) * (2 * n): c} if c else {})

    @classmethod
    def var(cls, n: int, index: int) -> "BasePoly":
        """The coordinate with 1-based ``index`` (1..N are x, N+1..2N are p)."""
        _check_index(n, index)
        exp = [0] * (2 * n)
        exp[index - 1] = 1
        return cls._raw(n, {tuple(exp): Rational(1)})

    @classmethod
    def x(cls, n: int, i: int) -> "BasePoly":
        return cls.var(n, i)

    @classmethod
    def p(cls, n: int, i: int) -> "BasePoly":
        return cls.var(n, n + i)

    # accessors

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def sorted_items(self):
        """Terms in canonical order: descending total degree, then descending exponents."""
        return sorted(self._terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-e for e in kv[0])))

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def constant_term(self) -> Rational:
        return self._terms.get((0,) * (2 * self.n), Rational(0))

    def depends_on_x(self) -> bool:
        return any(any(e[: self.n]) for e in self._terms)

    def __eq__(self, other):
        if isinstance(other, BasePoly):
            return self.n == other.n and self._terms == other._terms
        if isinstance(other, RATIONAL_TYPES):
            return self == BasePoly.const(self.n, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        from .parse import render_poly

        return f"BasePoly({render_poly(self)!r})"

    def __str__(self):
        from .parse import render_poly

        return render_poly(self)

    # arithmetic

    def _coerce(self, other) -> "BasePoly":
        if isinstance(other, BasePoly):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: N={self.n} vs N={other.n}")
            return other
        if isinstance(other, RATIONAL_TYPES):
            return BasePoly.const(self.n, other)
        raise TypeError(f"cannot combine BasePoly with {type(other).__name__}")

    def __add__(self, other):
        return add(self, self._coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return BasePoly._raw(self.n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return add(self, -self._coerce(other))

    def __rsub__(self, other):
        return add(self._coerce(other), -self)

    def __mul__(self, other):
        if isinstance(other, RATIONAL_TYPES):
            return scale(self, other)
        return mul(self, self._coerce(other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = BasePoly.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out


def _check_index(n: int, index: int) -> None:
    if not 1 <= index <= 2 * n:
        raise IndexError(f"coordinate index {index} out of range 1..{2 * n}")


def _same_dim(a: BasePoly, b: BasePoly) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: N={a.n} vs N={b.n}")


def add(a: BasePoly, b: BasePoly) -> BasePoly:
    _same_dim(a, b)
    out = dict(a._terms)
    for e, c in b._terms.items():
        s = out.get(e, 0) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return BasePoly._raw(a.n, out)


def scale(a: BasePoly, c) -> BasePoly:
    c = as_rational(c)
    if not c:
        return BasePoly.zero(a.n)
    return BasePoly._raw(a.n, {e: v * c for e, v in a._terms.items()})


def mul(a: BasePoly, b: BasePoly) -> BasePoly:
    _same_dim(a, b)
    out: dict = {}
    for ea, ca in a._terms.items():
        for eb, cb in b._terms.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            s = out.get(e, 0) + ca * cb
            if s:
                out[e] = s
            else:
                del out[e]
    return BasePoly._raw(a.n, out)


def partial(a: BasePoly, index: int) -> BasePoly:
    """Formal derivative by the coordinate with 1-based ``index``."""
    _check_index(a.n, index)
    k = index - 1
    out = {}
    for e, c in a._terms.items():
        if e[k]:
            e2 = list(e)
            e2[k] -= 1
            out[tuple(e2)] = c * e[k]
    return BasePoly._raw(a.n, out)


def substitute_x(a: BasePoly, c: Sequence) -> BasePoly:
    """Evaluate every x^i at ``c[i]``; the result depends on p only."""
    if len(c) != a.n:
        raise ValueError(f"leaf vector has length {len(c)}, expected {a.n}")
    c = [as_rational(v) for v in c]
    n = a.n
    out: dict = {}
    for e, coeff in a._terms.items():
        v = coeff
        for i in range(n):
            if e[i]:
                v *= c[i] ** e[i]
        if not v:
            continue
        key = (0,) * n + e[n:]
        s = out.get(key, 0) + v
        if s:
            out[key] = s
        else:
            del out[key]
    return BasePoly._raw(n, out)


def poly_sum(n: int, polys: Iterable[BasePoly]) -> BasePoly:
    out = BasePoly.zero(n)
    for q in polys:
        out = add(out, q)
    return out
