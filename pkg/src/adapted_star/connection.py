"""Symplectic connections adapted to the vertical polarization.

A connection is given by lowered Christoffel symbols
Gamma_{ijk} = omega_{il} Gamma^l_{jk} (coordinate indices 1..2N, x then p),
which must be totally symmetric.  It preserves the polarization
L = span{d/dp} iff the L'-component of nabla_{d/dp_a} d/dp_b vanishes; with
the Darboux omega that is exactly Gamma_{p_i p_a p_b} = 0.

On W (x) Lambda the covariant derivative is

    nabla a = d a + (1/lambda) [conn_form, a],
    conn_form = -1/2 sum Gamma_{ijk} y^i y^j dz^k,

where y^i is the fiber coordinate dual to z^i: y^{x_i} = eta_i and
y^{p_i} = -xi^i.  The overall sign is pinned by agreement with the frame
formula nabla e_j = Gamma^l_{kj} e_l dz^k (see :func:`nabla_frame`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .ring import RATIONAL_TYPES, BasePoly, Rational, partial
from .weyl import ChartContext, WeylForm, _acc, ad_over_lambda, circ, wedge_sign

CONN_SIGN = Rational(-1, 2)


class InvalidConnection(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str  # "symmetry" or "self-parallel"
    indices: tuple

    def __str__(self):
        return f"violation({self.kind}, {self.indices})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else "; ".join(str(v) for v in self.violations)


@dataclass(frozen=True)
class ConnectionSpec:
    """Lowered Christoffel symbols as a sparse map {(i, j, k): BasePoly}."""

    n: int
    entries: tuple = field(default=())

    def __init__(self, n: int, gamma_low: Mapping | None = None):
        items = []
        for idx, q in (gamma_low or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != 3 or not all(1 <= i <= 2 * n for i in idx):
                raise IndexError(f"connection index {idx} out of range 1..{2 * n}")
            if isinstance(q, RATIONAL_TYPES):
                q = BasePoly.const(n, q)
            if q.n != n:
                raise ValueError("connection coefficient has wrong dimension")
            if not q.is_zero():
                items.append((idx, q))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "entries", tuple(sorted(items, key=lambda t: t[0])))

    @classmethod
    def flat(cls, n: int) -> "ConnectionSpec":
        return cls(n, {})

    @classmethod
    def symmetric(cls, n: int, gamma_low: Mapping) -> "ConnectionSpec":
        """Fill in every permutation of each given index triple."""
        full: dict = {}
        for idx, q in gamma_low.items():
            for perm in set(itertools.permutations(idx)):
                full[perm] = q
        return cls(n, full)

    @property
    def gamma_low(self) -> dict:
        return dict(self.entries)

    def coeff(self, i: int, j: int, k: int) -> BasePoly:
        return self.gamma_low.get((i, j, k), BasePoly.zero(self.n))

    def is_flat(self) -> bool:
        return not self.entries

    def raised(self, ctx: ChartContext) -> dict:
        """Gamma^l_{jk} = sum_m (omega^{-1})_{lm} Gamma_{mjk}, sparse."""
        w = ctx.omega_inv
        out: dict = {}
        for (m, j, k), q in self.entries:
            for l in range(1, ctx.dim + 1):
                c = w[l - 1][m - 1]
                if c:
                    key = (l, j, k)
                    out[key] = out.get(key, BasePoly.zero(self.n)) + q * c
        return {k: v for k, v in out.items() if not v.is_zero()}


def validate_connection(spec: ConnectionSpec, ctx: ChartContext) -> ValidationReport:
    if spec.n != ctx.n:
        return ValidationReport((Violation("dimension", (spec.n, ctx.n)),))
    violations = []
    g = spec.gamma_low
    seen = set()
    for idx in sorted(g):
        for perm in sorted(set(itertools.permutations(idx))):
            if perm == idx or (idx, perm) in seen:
                continue
            seen.add((perm, idx))
            if g.get(perm, BasePoly.zero(spec.n)) != g[idx]:
                violations.append(Violation("symmetry", idx))
                break
    raised = spec.raised(ctx)
    for (l, a, b), q in sorted(raised.items()):
        if ctx.is_L(a) and ctx.is_L(b) and not ctx.is_L(l):
            violations.append(Violation("self-parallel", (l, a, b)))
    return ValidationReport(tuple(violations))


@lru_cache(maxsize=64)
def _checked(spec: ConnectionSpec, ctx: ChartContext) -> None:
    report = validate_connection(spec, ctx)
    if not report.ok:
        raise InvalidConnection(str(report))


def fiber_coordinate(ctx: ChartContext, i: int) -> tuple[int, int]:
    """y^i = sum_a (omega^{-1})_{ai} e_a as (frame index, sign)."""
    w = ctx.omega_inv
    for a in range(1, ctx.dim + 1):
        c = w[a - 1][i - 1]
        if c:
            return a, int(c)
    raise AssertionError("omega is degenerate")


@lru_cache(maxsize=256)
def connection_form(spec: ConnectionSpec, ctx: ChartContext, trunc: int) -> WeylForm:
    """-1/2 sum Gamma_{ijk} y^i y^j dz^k with y^i y^j the symmetric product."""
    out: dict = {}
    for (i, j, k), q in spec.entries:
        a, sa = fiber_coordinate(ctx, i)
        b, sb = fiber_coordinate(ctx, j)
        f = [0] * ctx.dim
        f[a - 1] += 1
        f[b - 1] += 1
        for e, c in q.items():
            _acc(out, (0, e, tuple(f), 1 << (k - 1)), CONN_SIGN * c * sa * sb)
    return WeylForm(ctx, trunc, out)


def d_base(a: WeylForm) -> WeylForm:
    """Exterior derivative of the base coefficients, dz^k wedged on the left."""
    ctx = a.ctx
    out: dict = {}
    for (lam, base, fiber, mask), c in a.items():
        for k in range(1, ctx.dim + 1):
            e = base[k - 1]
            if not e:
                continue
            bit = 1 << (k - 1)
            s = wedge_sign(bit, mask)
            if not s:
                continue
            b2 = list(base)
            b2[k - 1] -= 1
            _acc(out, (lam, tuple(b2), fiber, mask | bit), c * e * s)
    return WeylForm._trusted(ctx, a.trunc, out)


def nabla(a: WeylForm, spec: ConnectionSpec) -> WeylForm:
    _checked(spec, a.ctx)
    if spec.is_flat():
        return d_base(a)
    return d_base(a) + ad_over_lambda(connection_form(spec, a.ctx, a.trunc), a)


def nabla_frame(ctx: ChartContext, spec: ConnectionSpec, trunc: int, j: int) -> WeylForm:
    """nabla e_j = sum_{k,l} Gamma^l_{kj} e_l dz^k, straight from the Christoffel symbols."""
    out: dict = {}
    for (l, k, jj), q in spec.raised(ctx).items():
        if jj != j:
            continue
        f = [0] * ctx.dim
        f[l - 1] = 1
        for e, c in q.items():
            _acc(out, (0, e, tuple(f), 1 << (k - 1)), c)
    return WeylForm(ctx, trunc, out)


CURVATURE_SCALE = Rational(1, 2)


def leafwise_homotopy(a: WeylForm) -> WeylForm:
    """Radial homotopy in the p-variables on the pure-dp part of a fiber-free form.

    On p^e dp_I with |e| + |I| > 0 it returns 1/(|e|+|I|) sum_j +-p_j p^e dp_{I - j},
    so d_p h + h d_p = Id on leafwise forms of positive degree.
    """
    n = a.ctx.n
    dx_mask = (1 << n) - 1
    out: dict = {}
    for (lam, base, fiber, mask), c in a.items():
        if any(fiber) or not mask or mask & dx_mask:
            continue
        weight = Rational(1, sum(base[n:]) + bin(mask).count("1"))
        rest = mask
        while rest:
            bit = rest & -rest
            rest ^= bit
            j = bit.bit_length()
            b2 = list(base)
            b2[j - 1] += 1
            _acc(out, (lam, tuple(b2), fiber, mask ^ bit), c * weight * wedge_sign(bit, mask ^ bit))
    return WeylForm._trusted(a.ctx, a.trunc, out)


@lru_cache(maxsize=64)
def curvature_gamma(spec: ConnectionSpec, ctx: ChartContext, trunc: int = 2) -> WeylForm:
    """The curvature element: nabla^2 a = (1/lambda)[Gamma, a], Gamma in I, delta Gamma = nabla Gamma = 0.

    Its fiber-quadratic part is the polarization-ordered sum of
    :func:`ordered_curvature`, so it differs from that sum by central terms
    only.  The central part is the Weyl-symmetric one plus the exact form
    d(theta) that cancels its dp ^ dp component; being closed, the
    correction keeps the Bianchi identity the Fedosov recursion needs.
    """
    sym = symmetric_curvature(spec, ctx, trunc)
    central = sym.component(fiber_degree=0)
    theta = -leafwise_homotopy(central)
    return sym + d_base(theta)


@lru_cache(maxsize=64)
def ordered_curvature(spec: ConnectionSpec, ctx: ChartContext, trunc: int = 2) -> WeylForm:
    """Half the polarization-ordered sum, taken literally.

    For e_i in L the fiber vector u^{-1}(dz^i) multiplies nabla^2 e_i from
    the left, for e_i in L' from the right, so every term carries an eta or
    a dx.  Its lambda * (2-form) central part is generally not closed.
    """
    _checked(spec, ctx)
    work = max(trunc, 2)
    total = WeylForm.zero(ctx, work)
    for i in range(1, ctx.dim + 1):
        e_i = WeylForm.generator(ctx, work, i)
        curv = nabla(nabla(e_i, spec), spec)
        k, s = ctx.u_inv(i)
        dual = WeylForm.generator(ctx, work, k, s)
        total = total + (circ(dual, curv) if ctx.is_L(i) else circ(curv, dual))
    return (total * CURVATURE_SCALE).with_trunc(trunc)


@lru_cache(maxsize=64)
def symmetric_curvature(spec: ConnectionSpec, ctx: ChartContext, trunc: int = 2) -> WeylForm:
    """1/4 sum_i (u^{-1}(dz^i) o nabla^2 e_i + nabla^2 e_i o u^{-1}(dz^i))."""
    _checked(spec, ctx)
    work = max(trunc, 2)
    total = WeylForm.zero(ctx, work)
    for i in range(1, ctx.dim + 1):
        curv = nabla(nabla(WeylForm.generator(ctx, work, i), spec), spec)
        k, s = ctx.u_inv(i)
        dual = WeylForm.generator(ctx, work, k, s)
        total = total + circ(dual, curv) + circ(curv, dual)
    return (total * Rational(1, 4)).with_trunc(trunc)
