"""Fedosov construction adapted to the polarization, and the leaf module.

Sign conventions:

* ``D = delta - nabla - (1/lambda)[r, .]`` together with the recursion
  ``r = delta_inv(Gamma + nabla r + (1/lambda) r o r)``.  Flatness of D
  forces delta r and nabla r to enter the curvature with the same sign,
  so the recursion's ``+nabla r`` fixes the sign of nabla in D.
* ``Q = Id + delta_inv (D - delta)`` intertwines: ``delta Q = Q D``.
* Flat lifts of coordinates are ``x^i - eta_i`` and ``p_i + xi^i``.

With these, ``f * g = tau(Q^{-1} f o Q^{-1} g)`` has
``[x^i, p_j]_* = lambda delta^i_j`` and, for a flat connection, equals the
standard-ordered product ``sum lambda^|a| / a! d_x^a f d_p^a g``.

Precision: a value built at truncation K is exact through filtration K.
delta lowers the filtration by one, so ``D a`` is exact through K - 1 and
``D D a`` through K - 2.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

from .connection import ConnectionSpec, curvature_gamma, nabla, validate_connection, InvalidConnection
from .ideals import LeafSpec, reduce_mod_Ifin
from .koszul import delta, delta_inv, tau
from .ring import RATIONAL_TYPES, BasePoly, Rational, as_rational, substitute_x
from .weyl import ChartContext, WeylForm, ad_over_lambda, circ, tau_circ

log = logging.getLogger(__name__)


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    ctx: ChartContext
    spec: ConnectionSpec
    leaf: LeafSpec
    trunc_K: int = 4
    max_iter: int | None = None

    def __post_init__(self):
        if self.trunc_K < 2:
            raise ValueError("trunc_K must be at least 2")
        if self.max_iter is None:
            object.__setattr__(self, "max_iter", self.trunc_K + 2)
        if self.max_iter < self.trunc_K:
            raise ValueError("max_iter must be at least trunc_K")
        if self.spec.n != self.ctx.n or self.leaf.n != self.ctx.n:
            raise ValueError("connection, leaf and chart disagree on N")

    @property
    def order(self) -> int:
        """Highest lambda order of star products that is exact at this truncation."""
        return self.trunc_K // 2


@dataclass(frozen=True)
class FedosovState:
    config: EngineConfig
    gamma: WeylForm
    r: WeylForm
    iterations: int = 0
    # Q^{-1} of base monomials, filled lazily; Q^{-1} is linear over R[[lambda]]
    _lifts: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def ctx(self) -> ChartContext:
        return self.config.ctx

    @property
    def trunc(self) -> int:
        return self.config.trunc_K


class Series:
    """A lambda-series sum_k lambda^k c_k of base polynomials, exact through ``order``."""

    __slots__ = ("n", "coeffs", "order")

    def __init__(self, n: int, coeffs: Sequence[BasePoly], order: int):
        coeffs = list(coeffs)[: order + 1]
        coeffs += [BasePoly.zero(n)] * (order + 1 - len(coeffs))
        self.n = n
        self.coeffs = tuple(coeffs)
        self.order = order

    @classmethod
    def constant(cls, q: BasePoly, order: int) -> "Series":
        return cls(q.n, [q], order)

    @classmethod
    def from_weyl(cls, a: WeylForm, order: int) -> "Series":
        n = a.ctx.n
        coeffs = [dict() for _ in range(order + 1)]
        for (lam, base, fiber, mask), c in a.items():
            if any(fiber) or mask:
                raise ValueError("element is not a plain lambda-series")
            if lam <= order:
                coeffs[lam][base] = c
        return cls(n, [BasePoly(n, d) for d in coeffs], order)

    def to_weyl(self, ctx: ChartContext, trunc: int) -> WeylForm:
        out = {}
        z = (0,) * ctx.dim
        for k, q in enumerate(self.coeffs):
            for e, c in q.items():
                out[(k, e, z, 0)] = c
        return WeylForm(ctx, trunc, out)

    def __getitem__(self, k: int) -> BasePoly:
        return self.coeffs[k] if k <= self.order else BasePoly.zero(self.n)

    def _lift(self, other) -> "Series":
        if isinstance(other, Series):
            return other
        if isinstance(other, BasePoly):
            return Series.constant(other, self.order)
        return Series.constant(BasePoly.const(self.n, other), self.order)

    def __add__(self, other):
        other = self._lift(other)
        m = min(self.order, other.order)
        return Series(self.n, [self[k] + other[k] for k in range(m + 1)], m)

    def __sub__(self, other):
        other = self._lift(other)
        m = min(self.order, other.order)
        return Series(self.n, [self[k] - other[k] for k in range(m + 1)], m)

    def __neg__(self):
        return Series(self.n, [-c for c in self.coeffs], self.order)

    def scale(self, c) -> "Series":
        return Series(self.n, [q * as_rational(c) for q in self.coeffs], self.order)

    def times_lambda(self, k: int = 1) -> "Series":
        return Series(self.n, [BasePoly.zero(self.n)] * k + list(self.coeffs), self.order)

    def map(self, fn) -> "Series":
        return Series(self.n, [fn(q) for q in self.coeffs], self.order)

    def truncated(self, order: int) -> "Series":
        return Series(self.n, self.coeffs, min(order, self.order))

    def is_zero(self) -> bool:
        return all(q.is_zero() for q in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (BasePoly,) + RATIONAL_TYPES):
            other = self._lift(other)
        if not isinstance(other, Series):
            return NotImplemented
        m = min(self.order, other.order)
        return self.n == other.n and all(self[k] == other[k] for k in range(m + 1))

    __hash__ = None

    def render(self) -> str:
        from .parse import render_poly

        chunks = []
        for k, q in enumerate(self.coeffs):
            if q.is_zero():
                continue
            text = render_poly(q)
            if k == 0:
                chunks.append(text)
                continue
            lam = "λ" if k == 1 else f"λ^{k}"
            if len(q.terms) > 1 or text.startswith("-"):
                text = f"({text})"
            chunks.append(f"{lam}·{text}")
        return " + ".join(chunks) if chunks else "0"

    def __repr__(self):
        return f"Series({self.render()!r}, order={self.order})"

    __str__ = render


Scalar = Union[BasePoly, Series, WeylForm]


def _as_weyl(f: Scalar, state: FedosovState) -> WeylForm:
    if isinstance(f, WeylForm):
        return f
    if isinstance(f, BasePoly):
        return WeylForm.from_base(f, state.trunc, state.ctx)
    if isinstance(f, Series):
        return f.to_weyl(state.ctx, state.trunc)
    raise TypeError(f"cannot lift {type(f).__name__}")


def r_square_over_lambda(r: WeylForm) -> WeylForm:
    """(1/lambda) r o r for a 1-form r, computed as (1/2)(1/lambda)[r, r]."""
    return ad_over_lambda(r, r) * Rational(1, 2)


def fedosov_rhs(r: WeylForm, gamma: WeylForm, spec: ConnectionSpec) -> WeylForm:
    """Gamma + nabla r + (1/lambda) r o r."""
    return gamma + nabla(r, spec) + r_square_over_lambda(r)


def solve_r(config: EngineConfig) -> FedosovState:
    """Iterate r <- delta_inv(Gamma + nabla r + r o r / lambda) from r = 0 until it stabilizes."""
    ctx, spec, K = config.ctx, config.spec, config.trunc_K
    report = validate_connection(spec, ctx)
    if not report.ok:
        raise InvalidConnection(str(report))
    gamma = curvature_gamma(spec, ctx, K)
    r = WeylForm.zero(ctx, K)
    for step in range(1, config.max_iter + 1):
        nxt = delta_inv(fedosov_rhs(r, gamma, spec))
        if nxt == r:
            log.debug("r stabilized after %d steps (%d terms)", step, len(r))
            return FedosovState(config, gamma, r, step)
        r = nxt
    raise NonConvergence(f"r did not stabilize within {config.max_iter} iterations")


def fedosov_residual(state: FedosovState) -> WeylForm:
    """delta r - Gamma - nabla r - r o r / lambda, meaningful through filtration K - 1."""
    r = state.r
    return delta(r) - fedosov_rhs(r, state.gamma, state.config.spec)


def _d_minus_delta(a: WeylForm, state: FedosovState) -> WeylForm:
    out = -nabla(a, state.config.spec)
    if state.r:
        out = out - ad_over_lambda(state.r, a)
    return out


def fedosov_D(a: WeylForm, state: FedosovState) -> WeylForm:
    """D a = delta a - nabla a - (1/lambda)[r, a]."""
    return delta(a) + _d_minus_delta(a, state)


def q_map(a: WeylForm, state: FedosovState) -> WeylForm:
    """Q a = a + delta_inv((D - delta) a)."""
    return a + delta_inv(_d_minus_delta(a, state))


def _q_inverse_series(a: WeylForm, state: FedosovState) -> WeylForm:
    b = a
    t = a
    for _ in range(state.trunc + 2):
        t = -delta_inv(_d_minus_delta(t, state))
        if not t:
            return b
        b = b + t
    raise NonConvergence("Q^-1 series did not terminate at the truncation")


def q_inverse(a: Scalar, state: FedosovState) -> WeylForm:
    """Solve Q b = a as the series b = sum_k (-delta_inv (D - delta))^k a.

    Each application raises the filtration by at least one, so the series
    terminates at the truncation.  Fiber-free, form-free input is split into
    base monomials whose lifts are cached on the state.
    """
    a = _as_weyl(a, state)
    if any(any(k[2]) or k[3] for k in a.keys()):
        return _q_inverse_series(a, state)
    out = WeylForm.zero(state.ctx, state.trunc)
    z = (0,) * state.ctx.dim
    for (lam, base, _, _), c in a.items():
        lift = state._lifts.get(base)
        if lift is None:
            lift = _q_inverse_series(WeylForm._raw(state.ctx, state.trunc, {(0, base, z, 0): Rational(1)}), state)
            state._lifts[base] = lift
        out = out + (lift.times_lambda(lam) if lam else lift) * c
    return out


def star(f: Scalar, g: Scalar, state: FedosovState) -> Series:
    """f *_L g = tau(Q^{-1} f o Q^{-1} g), exact through lambda^(K // 2)."""
    prod = tau_circ(q_inverse(f, state), q_inverse(g, state))
    return Series.from_weyl(prod, state.config.order)


def flat_star_oracle(f: BasePoly, g: BasePoly, order: int, trunc_K: int | None = None) -> Series:
    """Standard-ordered product sum_a lambda^|a| / a! (d_x^a f)(d_p^a g), independent of the engine."""
    from math import factorial
    from itertools import product as iproduct

    from .ring import partial

    if trunc_K is not None and order > trunc_K // 2:
        raise ValueError(f"order {order} exceeds trunc_K // 2 = {trunc_K // 2}")
    n = f.n
    coeffs = [BasePoly.zero(n) for _ in range(order + 1)]
    for alpha in iproduct(range(order + 1), repeat=n):
        k = sum(alpha)
        if k > order:
            continue
        df, dg = f, g
        denom = 1
        for i, a in enumerate(alpha):
            denom *= factorial(a)
            for _ in range(a):
                df = partial(df, i + 1)
                dg = partial(dg, n + i + 1)
        coeffs[k] = coeffs[k] + df * dg * Rational(1, denom)
    return Series(n, coeffs, order)


def act_on_extension(f: Scalar, psi_ext: Scalar, state: FedosovState) -> Series:
    """Leaf action computed from an arbitrary extension ``psi_ext`` of the leaf function."""
    leaf = state.config.leaf
    n = state.ctx.n
    dx = (1 << n) - 1
    # Terms that can only produce I-terms are dropped before multiplying:
    # a dx on either side survives the wedge, and an eta on the right stays rightmost.
    left = q_inverse(f, state).map_terms(lambda k, c: [] if k[3] & dx else [(k, c)])
    right = q_inverse(psi_ext, state).map_terms(lambda k, c: [] if k[3] & dx or any(k[2][n:]) else [(k, c)])
    prod = circ(left, right)
    rep = reduce_mod_Ifin(prod, leaf)
    out = Series.from_weyl(tau(q_map(rep, state)), state.config.order)
    return out.map(lambda q: substitute_x(q, leaf.c))


def module_action(f: Scalar, psi: Union[BasePoly, Series], state: FedosovState) -> Series:
    """Left action of (A, *_L) on functions on the leaf, psi given as a function of p."""
    polys = psi.coeffs if isinstance(psi, Series) else [psi]
    if any(q.depends_on_x() for q in polys):
        raise ValueError("leaf function must depend on p only")
    return act_on_extension(f, psi, state)


def build_state(ctx: ChartContext, spec: ConnectionSpec, leaf: LeafSpec | Sequence, trunc_K: int, max_iter=None) -> FedosovState:
    if not isinstance(leaf, LeafSpec):
        leaf = LeafSpec(leaf)
    return solve_r(EngineConfig(ctx, spec, leaf, trunc_K, max_iter))
