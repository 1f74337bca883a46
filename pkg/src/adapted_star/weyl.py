"""The formal Weyl algebra tensored with differential forms, on one Darboux chart.

Coordinates are z = (x^1..x^N, p_1..p_N) and the symplectic form is
omega = sum_i dx^i ^ dp_i, i.e. omega(d/dx^i, d/dp_j) = delta^i_j.

Frame index k in 1..2N labels the fiber generator attached to d/dz^k:
k <= N is xi^k (the L' direction d/dx^k), k > N is eta_{k-N} (the
polarization L = span d/dp).  Form index k labels dz^k.

Elements are stored in PBW normal form with every xi to the left of every
eta.  The defining relation y z - z y = lambda * omega(y, z) gives
eta_i xi^i = xi^i eta_i - lambda, and the product of two normal monomials is

    eta^b o xi^c = sum_alpha (-lambda)^|alpha| / alpha! (d_eta^alpha eta^b)(d_xi^alpha xi^c)

with xi-powers kept left of eta-powers.
"""
from __future__ import annotations

import itertools
import operator
import random
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Iterable, NamedTuple, Sequence

from .ring import RATIONAL_TYPES, BasePoly, Rational, as_rational

LAMBDA = "λ"


@dataclass(frozen=True)
class ChartContext:
    """Darboux chart of half-dimension ``n`` with the vertical polarization."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("N must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def omega(self) -> tuple:
        """omega(e_i, e_j) as a 2N x 2N matrix (0-based), block [[0, I], [-I, 0]]."""
        n = self.n
        rows = [[Rational(0)] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            rows[i][n + i] = Rational(1)
            rows[n + i][i] = Rational(-1)
        return tuple(tuple(r) for r in rows)

    @property
    def omega_inv(self) -> tuple:
        n = self.n
        rows = [[Rational(0)] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            rows[i][n + i] = Rational(-1)
            rows[n + i][i] = Rational(1)
        return tuple(tuple(r) for r in rows)

    def is_L(self, k: int) -> bool:
        """True if frame index k (1-based) lies in the polarization L."""
        return k > self.n

    def u(self, k: int) -> tuple[int, int]:
        """u(e_k) = omega(e_k, .) as (form index, sign): u(xi^i) = dp_i, u(eta_i) = -dx^i."""
        n = self.n
        return (k + n, 1) if k <= n else (k - n, -1)

    def u_inv(self, j: int) -> tuple[int, int]:
        """u^{-1}(dz^j) as (frame index, sign): dp_i -> xi^i, dx^i -> -eta_i."""
        n = self.n
        return (j + n, -1) if j <= n else (j - n, 1)

    def fiber_name(self, k: int) -> str:
        return f"ξ{k}" if k <= self.n else f"η{k - self.n}"

    def form_name(self, k: int) -> str:
        return f"dx{k}" if k <= self.n else f"dp{k - self.n}"

    def coord_name(self, k: int) -> str:
        return f"x{k}" if k <= self.n else f"p{k - self.n}"


class Term(NamedTuple):
    coeff: object
    lambda_pow: int
    base: tuple
    fiber_xi: tuple
    fiber_eta: tuple
    form: tuple  # sorted 1-based form indices


def _popcount(m: int) -> int:
    return bin(m).count("1")


@lru_cache(maxsize=None)
def wedge_sign(a: int, b: int) -> int:
    """Sign of (sorted a) ^ (sorted b) relative to sorted(a | b); 0 if they overlap."""
    if a & b:
        return 0
    swaps = 0
    bb = b
    while bb:
        low = bb & -bb
        # generators of a that sit above this generator of b must hop over it
        swaps += _popcount(a & ~((low << 1) - 1))
        bb ^= low
    return -1 if swaps & 1 else 1


def form_indices(mask: int) -> tuple:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k + 1)
        mask >>= 1
        k += 1
    return tuple(out)


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for k in indices:
        m |= 1 << (k - 1)
    return m


@lru_cache(maxsize=None)
def _contraction_table(b: int, c: int) -> tuple:
    """[(alpha, (-1)^alpha * b!/(b-alpha)! * c!/(c-alpha)! / alpha!)] for one index."""
    out = []
    for k in range(min(b, c) + 1):
        v = Rational(factorial(b) * factorial(c), factorial(b - k) * factorial(c - k) * factorial(k))
        out.append((k, -v if k & 1 else v))
    return tuple(out)


class WeylForm:
    """A finite sum of terms lambda^l * f(x,p) * xi^a eta^b * dz^I, truncated at filtration ``trunc``.

    Keys are ``(lambda_pow, base_exp, fiber_exp, form_mask)``; ``fiber_exp``
    lists xi-exponents then eta-exponents.  The filtration degree of a term
    is its fiber degree plus twice its lambda power; terms above ``trunc``
    are dropped on construction.
    """

    __slots__ = ("ctx", "trunc", "_terms", "_grouped")

    def __init__(self, ctx: ChartContext, trunc: int, terms: dict | None = None):
        self.ctx = ctx
        self.trunc = trunc
        out = {}
        for key, c in (terms or {}).items():
            c = as_rational(c)
            if c and _key_degree(key) <= trunc:
                s = out.get(key, 0) + c
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        self._terms = out
        self._grouped = None

    @classmethod
    def _raw(cls, ctx, trunc, terms):
        obj = cls.__new__(cls)
        obj.ctx = ctx
        obj.trunc = trunc
        obj._terms = terms
        obj._grouped = None
        return obj

    @classmethod
    def _trusted(cls, ctx, trunc, terms: dict) -> "WeylForm":
        """Wrap exact coefficients, dropping zeros and terms above ``trunc``."""
        return cls._raw(ctx, trunc, {k: c for k, c in terms.items() if c and _key_degree(k) <= trunc})

    def _groups(self) -> list:
        """Terms grouped by (lambda, fiber, form), sorted by filtration degree.

        Each entry is (degree, lambda, xi, eta, mask, form degree, {base: coeff}).
        The product only contracts fibers, so base exponents ride along.
        """
        if self._grouped is None:
            n = self.ctx.n
            groups: dict = {}
            for (lam, base, fiber, mask), c in self._terms.items():
                groups.setdefault((lam, fiber, mask), {})[base] = c
            self._grouped = sorted(
                ((sum(f) + 2 * lam, lam, f[:n], f[n:], mask, _popcount(mask), polys) for (lam, f, mask), polys in groups.items()),
                key=lambda g: g[0],
            )
        return self._grouped

    # constructors

    @classmethod
    def zero(cls, ctx: ChartContext, trunc: int) -> "WeylForm":
        return cls._raw(ctx, trunc, {})

    @classmethod
    def scalar(cls, ctx, trunc, c=1, lambda_pow: int = 0) -> "WeylForm":
        z = (0,) * ctx.dim
        return cls(ctx, trunc, {(lambda_pow, z, z, 0): c})

    @classmethod
    def from_base(cls, q: BasePoly, trunc: int, ctx: ChartContext | None = None, lambda_pow: int = 0):
        ctx = ctx or ChartContext(q.n)
        if q.n != ctx.n:
            raise ValueError("dimension mismatch")
        z = (0,) * ctx.dim
        return cls(ctx, trunc, {(lambda_pow, e, z, 0): c for e, c in q.items()})

    @classmethod
    def generator(cls, ctx, trunc, k: int, c=1) -> "WeylForm":
        """The fiber generator with frame index k (xi^k for k <= N, eta_{k-N} otherwise)."""
        if not 1 <= k <= ctx.dim:
            raise IndexError(f"frame index {k} out of range")
        f = [0] * ctx.dim
        f[k - 1] = 1
        z = (0,) * ctx.dim
        return cls(ctx, trunc, {(0, z, tuple(f), 0): c})

    @classmethod
    def xi(cls, ctx, trunc, i: int) -> "WeylForm":
        return cls.generator(ctx, trunc, i)

    @classmethod
    def eta(cls, ctx, trunc, i: int) -> "WeylForm":
        return cls.generator(ctx, trunc, ctx.n + i)

    @classmethod
    def dz(cls, ctx, trunc, k: int, c=1) -> "WeylForm":
        z = (0,) * ctx.dim
        return cls(ctx, trunc, {(0, z, z, 1 << (k - 1)): c})

    @classmethod
    def monomial(cls, ctx, trunc, coeff=1, lambda_pow=0, base=None, fiber=None, form=()):
        """Build a single term; ``form`` is a sequence of 1-based form indices in any order."""
        z = (0,) * ctx.dim
        sign = 1
        mask = 0
        for k in form:
            bit = 1 << (k - 1)
            s = wedge_sign(mask, bit)
            if s == 0:
                return cls.zero(ctx, trunc)
            sign *= s
            mask |= bit
        key = (lambda_pow, tuple(base) if base else z, tuple(fiber) if fiber else z, mask)
        return cls(ctx, trunc, {key: as_rational(coeff) * sign})

    # structure

    def items(self):
        return self._terms.items()

    def keys(self):
        return self._terms.keys()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    @property
    def terms(self) -> list[Term]:
        n = self.ctx.n
        return [
            Term(c, k[0], k[1], k[2][:n], k[2][n:], form_indices(k[3]))
            for k, c in sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]))
        ]

    def with_trunc(self, trunc: int) -> "WeylForm":
        return WeylForm._trusted(self.ctx, trunc, self._terms)

    def truncate(self, k: int) -> "WeylForm":
        """Drop terms of filtration degree above k, keeping the nominal truncation."""
        return WeylForm._raw(self.ctx, self.trunc, {key: c for key, c in self._terms.items() if _key_degree(key) <= k})

    def form_degrees(self) -> set:
        return {_popcount(k[3]) for k in self._terms}

    def fiber_degrees(self) -> set:
        return {sum(k[2]) for k in self._terms}

    def map_terms(self, fn) -> "WeylForm":
        out: dict = {}
        for key, c in self._terms.items():
            for k2, c2 in fn(key, c):
                _acc(out, k2, c2)
        return WeylForm(self.ctx, self.trunc, out)

    # comparisons and linear structure

    def _check(self, other: "WeylForm") -> None:
        if not isinstance(other, WeylForm):
            raise TypeError(f"expected WeylForm, got {type(other).__name__}")
        if other.ctx != self.ctx:
            raise ValueError("chart context mismatch")
        if other.trunc != self.trunc:
            raise ValueError(f"truncation mismatch: {self.trunc} vs {other.trunc}")

    def __eq__(self, other):
        if isinstance(other, WeylForm):
            return self.ctx == other.ctx and self._terms == other._terms
        if isinstance(other, RATIONAL_TYPES) and other == 0:
            return not self._terms
        return NotImplemented

    __hash__ = None

    def __add__(self, other):
        if isinstance(other, RATIONAL_TYPES):
            other = WeylForm.scalar(self.ctx, self.trunc, other)
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            _acc(out, k, c)
        return WeylForm._raw(self.ctx, self.trunc, out)

    __radd__ = __add__

    def __neg__(self):
        return WeylForm._raw(self.ctx, self.trunc, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, RATIONAL_TYPES):
            other = WeylForm.scalar(self.ctx, self.trunc, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if isinstance(c, WeylForm):
            return circ(self, c)
        c = as_rational(c)
        if not c:
            return WeylForm.zero(self.ctx, self.trunc)
        return WeylForm._raw(self.ctx, self.trunc, {k: v * c for k, v in self._terms.items()})

    def __rmul__(self, c):
        return self.__mul__(c)

    def __matmul__(self, other):
        return circ(self, other)

    def times_lambda(self, k: int = 1) -> "WeylForm":
        return WeylForm._trusted(self.ctx, self.trunc, {(key[0] + k,) + key[1:]: c for key, c in self._terms.items()})

    def divide_lambda(self) -> "WeylForm":
        """Exact division by lambda; raises if some term carries no lambda."""
        out = {}
        for key, c in self._terms.items():
            if key[0] == 0:
                raise ArithmeticError("element is not divisible by lambda")
            out[(key[0] - 1,) + key[1:]] = c
        return WeylForm._raw(self.ctx, self.trunc, out)

    def times_base(self, q: BasePoly) -> "WeylForm":
        out: dict = {}
        for key, c in self._terms.items():
            for e, v in q.items():
                _acc(out, (key[0], _add_exp(key[1], e), key[2], key[3]), c * v)
        return WeylForm(self.ctx, self.trunc, out)

    def component(self, *, fiber_degree=None, form_degree=None, lambda_pow=None) -> "WeylForm":
        def keep(k):
            return (
                (fiber_degree is None or sum(k[2]) == fiber_degree)
                and (form_degree is None or _popcount(k[3]) == form_degree)
                and (lambda_pow is None or k[0] == lambda_pow)
            )

        return WeylForm._raw(self.ctx, self.trunc, {k: c for k, c in self._terms.items() if keep(k)})

    def __repr__(self):
        return f"WeylForm({render(self)!r}, K={self.trunc})"

    def __str__(self):
        return render(self)


def _key_degree(key) -> int:
    return sum(key[2]) + 2 * key[0]


def _sort_key(key):
    lam, base, fiber, mask = key
    return (_popcount(mask), form_indices(mask), sum(fiber) + 2 * lam, lam, tuple(-f for f in fiber), -sum(base), tuple(-e for e in base))


def _acc(out: dict, key, c) -> None:
    s = out.get(key, 0) + c
    if s:
        out[key] = s
    else:
        out.pop(key, None)


def _add_exp(a: tuple, b: tuple) -> tuple:
    return tuple(map(operator.add, a, b))


def filtration_degree(a: WeylForm):
    """Minimum over terms of fiber degree + 2 * lambda power; None for zero."""
    return min((_key_degree(k) for k in a.keys()), default=None)


def _check_pair(a: WeylForm, b: WeylForm) -> None:
    if not isinstance(a, WeylForm) or not isinstance(b, WeylForm):
        raise TypeError("circ expects WeylForm operands")
    if a.ctx != b.ctx:
        raise ValueError("chart context mismatch")
    if a.trunc != b.trunc:
        raise ValueError(f"truncation mismatch: {a.trunc} vs {b.trunc}")


def _product_into(out: dict, a: WeylForm, b: WeylForm, scale, min_k: int, lam_shift: int, graded_sign: bool, trunc: int):
    """Accumulate scale * a o b into the grouped dict ``out``, keeping contractions of order >= min_k.

    ``out`` maps (lambda, fiber, mask) to {base: coeff}; see :func:`_flatten`.
    With ``graded_sign`` each term pair is further multiplied by
    (-1)^(form degree of a-term * form degree of b-term).
    """
    n = a.ctx.n
    shift2 = 2 * lam_shift
    rng = range(n)
    add = operator.add
    b_groups = b._groups()
    for da, la, a_xi, a_eta, ma, pa, polys_a in a._groups():
        limit = trunc - da - shift2
        for db, lb, b_xi, b_eta, mb, pb, polys_b in b_groups:
            if db > limit:
                break
            sign = wedge_sign(ma, mb)
            if not sign:
                continue
            if graded_sign and (pa & pb & 1):
                sign = -sign
            sign = sign * scale
            mask = ma | mb
            lam0 = la + lb + lam_shift
            if not any(a_eta[i] and b_xi[i] for i in rng):
                if min_k:
                    continue
                choices = (((lam0, _add_exp(a_xi, b_xi) + _add_exp(a_eta, b_eta)), sign),)
            else:
                choices = []
                for choice in itertools.product(*[_contraction_table(a_eta[i], b_xi[i]) for i in rng]):
                    k = 0
                    v = sign
                    for alpha, f in choice:
                        if alpha:
                            k += alpha
                            v = v * f
                    if k < min_k:
                        continue
                    xi = tuple(a_xi[i] + b_xi[i] - choice[i][0] for i in rng)
                    eta = tuple(a_eta[i] - choice[i][0] + b_eta[i] for i in rng)
                    choices.append(((lam0 + k, xi + eta), v))
                if not choices:
                    continue
            # zeros are left in place here and dropped by _flatten
            if len(polys_a) == 1 and len(polys_b) == 1:
                (ba, ca), = polys_a.items()
                (bb, cb), = polys_b.items()
                prod = {tuple(map(add, ba, bb)): ca * cb}
            else:
                prod = {}
                get = prod.get
                for ba, ca in polys_a.items():
                    for bb, cb in polys_b.items():
                        e = tuple(map(add, ba, bb))
                        prod[e] = get(e, 0) + ca * cb
            for (lam, fiber), v in choices:
                target = out.setdefault((lam, fiber, mask), {})
                get = target.get
                for e, c in prod.items():
                    target[e] = get(e, 0) + c * v


def _flatten(ctx: ChartContext, trunc: int, grouped: dict) -> WeylForm:
    terms = {}
    for (lam, fiber, mask), polys in grouped.items():
        for e, c in polys.items():
            if c:
                terms[(lam, e, fiber, mask)] = c
    return WeylForm._raw(ctx, trunc, terms)


def circ(a: WeylForm, b: WeylForm) -> WeylForm:
    """The fiberwise Weyl product with forms wedged, in normal form, truncated."""
    _check_pair(a, b)
    out: dict = {}
    _product_into(out, a, b, 1, 0, 0, False, a.trunc)
    return _flatten(a.ctx, a.trunc, out)


def graded_commutator(a: WeylForm, b: WeylForm) -> WeylForm:
    """a o b - (-1)^(|a||b|) b o a, graded by form degree only."""
    _check_pair(a, b)
    out: dict = {}
    # zeroth-order contractions cancel exactly, so only k >= 1 survives
    _product_into(out, a, b, 1, 1, 0, False, a.trunc)
    _product_into(out, b, a, -1, 1, 0, True, a.trunc)
    return _flatten(a.ctx, a.trunc, out)


def ad_over_lambda(a: WeylForm, b: WeylForm) -> WeylForm:
    """(1/lambda) [a, b]; exact because the commutator is always divisible by lambda."""
    _check_pair(a, b)
    out: dict = {}
    _product_into(out, a, b, 1, 1, -1, False, a.trunc)
    _product_into(out, b, a, -1, 1, -1, True, a.trunc)
    return _flatten(a.ctx, a.trunc, out)


def tau_circ(a: WeylForm, b: WeylForm) -> WeylForm:
    """tau(a o b) without forming the full product.

    A term of a o b is fiber-free and form-free only when the a-term is
    eta^beta, the b-term is xi^beta, and both carry no forms; the full
    contraction then contributes (-lambda)^|beta| beta!.
    """
    _check_pair(a, b)
    n = a.ctx.n
    zeros = (0,) * n
    by_xi: dict = {}
    for (lb, bb, fb, mb), cb in b.items():
        if not mb and not any(fb[n:]):
            by_xi.setdefault(fb[:n], []).append((lb, bb, cb))
    out: dict = {}
    z = (0,) * a.ctx.dim
    for (la, ba, fa, ma), ca in a.items():
        if ma or any(fa[:n]):
            continue
        beta = fa[n:]
        partners = by_xi.get(beta)
        if not partners:
            continue
        k = sum(beta)
        w = 1
        for e in beta:
            w *= factorial(e)
        w = ca * (-w if k & 1 else w)
        for lb, bb, cb in partners:
            lam = la + lb + k
            if 2 * lam <= a.trunc:
                _acc(out, (lam, _add_exp(ba, bb), z, 0), w * cb)
    return WeylForm._raw(a.ctx, a.trunc, out)


# rendering

def _fmt_coeff(c, first: bool, has_rest: bool) -> str:
    neg = c < 0
    mag = -c if neg else c
    body = "" if (mag == 1 and has_rest) else (str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}")
    if first:
        return ("-" if neg else "") + body
    return (" - " if neg else " + ") + body


def _factor(name: str, power: int) -> str:
    return name if power == 1 else f"{name}^{power}"


def render_term_body(ctx: ChartContext, key) -> list:
    lam, base, fiber, mask = key
    parts = []
    if lam:
        parts.append(_factor(LAMBDA, lam))
    for k, e in enumerate(base, 1):
        if e:
            parts.append(_factor(ctx.coord_name(k), e))
    for k, e in enumerate(fiber, 1):
        if e:
            parts.append(_factor(ctx.fiber_name(k), e))
    forms = [ctx.form_name(k) for k in form_indices(mask)]
    if forms:
        parts.append("∧".join(forms))
    return parts


def render(a: WeylForm) -> str:
    """Canonical text of a WeylForm: deterministic term order, exact rationals."""
    if a.is_zero():
        return "0"
    chunks = []
    for i, (key, c) in enumerate(sorted(a.items(), key=lambda kv: _sort_key(kv[0]))):
        parts = render_term_body(a.ctx, key)
        coeff = _fmt_coeff(c, i == 0, bool(parts))
        if parts:
            sep = "*" if coeff.strip(" +-") else ""
            chunks.append(coeff + sep + "*".join(parts))
        else:
            chunks.append(coeff)
    return "".join(chunks)


# brute-force rewriting oracle

def _ordinal(ctx: ChartContext, k: int) -> int:
    # eta_i -> i, xi^i -> N + i; normal words are nonincreasing in this ordinal
    return k + ctx.n if k <= ctx.n else k - ctx.n


def _omega_pair(ctx: ChartContext, j: int, k: int) -> int:
    n = ctx.n
    if j <= n and k == j + n:
        return 1
    if j > n and k == j - n:
        return -1
    return 0


def normal_words(ctx: ChartContext, word: Sequence[int], rng: random.Random | None = None) -> dict:
    """Rewrite a tensor word to {(lambda_pow, nonincreasing word): coeff}.

    Each step picks an out-of-order adjacent pair y z and replaces it by
    z y + lambda * omega(y, z).  Pairs are chosen leftmost-first, or uniformly
    at random when ``rng`` is supplied.
    """
    pending = {(0, tuple(word)): Rational(1)}
    done: dict = {}
    while pending:
        (lam, w), c = pending.popitem()
        bad = [i for i in range(len(w) - 1) if _ordinal(ctx, w[i]) < _ordinal(ctx, w[i + 1])]
        if not bad:
            _acc(done, (lam, w), c)
            continue
        i = rng.choice(bad) if rng is not None else bad[0]
        y, z = w[i], w[i + 1]
        _acc(pending, (lam, w[:i] + (z, y) + w[i + 2:]), c)
        om = _omega_pair(ctx, y, z)
        if om:
            _acc(pending, (lam + 1, w[:i] + w[i + 2:]), c * om)
    return done


def pbw_oracle(ctx: ChartContext, word: Sequence[int], weight=1, trunc: int | None = None, rng=None) -> WeylForm:
    """Normal form of ``weight * e_{w1} (x) ... (x) e_{wm}`` by exhaustive rewriting."""
    for k in word:
        if not 1 <= k <= ctx.dim:
            raise IndexError(f"frame index {k} out of range")
    trunc = len(word) if trunc is None else trunc
    weight = as_rational(weight)
    z = (0,) * ctx.dim
    out: dict = {}
    for (lam, w), c in normal_words(ctx, word, rng).items():
        f = [0] * ctx.dim
        for k in w:
            f[k - 1] += 1
        _acc(out, (lam, z, tuple(f), 0), c * weight)
    return WeylForm(ctx, trunc, out)


def _word_of(ctx: ChartContext, fiber: tuple) -> tuple:
    w = []
    for k in sorted(range(1, ctx.dim + 1), key=lambda k: -_ordinal(ctx, k)):
        w.extend([k] * fiber[k - 1])
    return tuple(w)


def oracle_product(a: WeylForm, b: WeylForm) -> WeylForm:
    """a o b computed by concatenating words and rewriting with :func:`pbw_oracle`."""
    _check_pair(a, b)
    ctx = a.ctx
    cache: dict = {}
    out: dict = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            sign = wedge_sign(ka[3], kb[3])
            if not sign:
                continue
            w = _word_of(ctx, ka[2]) + _word_of(ctx, kb[2])
            if w not in cache:
                cache[w] = pbw_oracle(ctx, w, trunc=10**9)
            base = _add_exp(ka[1], kb[1])
            for kw, cw in cache[w].items():
                _acc(out, (ka[0] + kb[0] + kw[0], base, kw[2], ka[3] | kb[3]), ca * cb * cw * sign)
    return WeylForm(ctx, a.trunc, out)
