"""Polarization ideals on normal forms.

Because eta-factors sit rightmost in a normal monomial, the left ideal
generated by L is spanned by the monomials containing some eta, and the
form ideal generated by u(L) = span{dx} by the monomials containing some
dx.  Membership is therefore syntactic.  The leaf {x = c} adds the
two-sided ideal generated by the x^i - c^i.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ring import BasePoly, as_rational
from .weyl import ChartContext, WeylForm, _acc


@dataclass(frozen=True)
class LeafSpec:
    """The leaf x^1 = c^1, ..., x^N = c^N of the vertical polarization."""

    c: tuple

    def __init__(self, c: Sequence):
        object.__setattr__(self, "c", tuple(as_rational(v) for v in c))

    @property
    def n(self) -> int:
        return len(self.c)

    def generators(self) -> list:
        """x^i - c^i as base polynomials."""
        n = self.n
        return [BasePoly.x(n, i + 1) - self.c[i] for i in range(n)]


def _dx_mask(n: int) -> int:
    return (1 << n) - 1


def _term_in_I(n: int, key) -> bool:
    return any(key[2][n:]) or bool(key[3] & _dx_mask(n))


def in_ideal_I(a: WeylForm) -> bool:
    n = a.ctx.n
    return all(_term_in_I(n, k) for k in a.keys())


def in_ideal_Lambda(a: WeylForm) -> bool:
    """Every term carries a dx factor."""
    m = _dx_mask(a.ctx.n)
    return all(k[3] & m for k in a.keys())


def split_forms(a: WeylForm) -> tuple[WeylForm, WeylForm]:
    """(part with only dp forms, part with some dx) -- the splitting of forms."""
    m = _dx_mask(a.ctx.n)
    lpart = {k: c for k, c in a.items() if not k[3] & m}
    ipart = {k: c for k, c in a.items() if k[3] & m}
    return WeylForm._raw(a.ctx, a.trunc, lpart), WeylForm._raw(a.ctx, a.trunc, ipart)


def reduce_mod_Ifin(a: WeylForm, leaf: LeafSpec) -> WeylForm:
    """Canonical representative of a + I_fin: no eta, no dx, x evaluated at c."""
    n = a.ctx.n
    if leaf.n != n:
        raise ValueError("leaf dimension mismatch")
    out: dict = {}
    zeros = (0,) * n
    for key, coeff in a.items():
        if _term_in_I(n, key):
            continue
        lam, base, fiber, mask = key
        v = coeff
        for i in range(n):
            if base[i]:
                v *= leaf.c[i] ** base[i]
        if v:
            _acc(out, (lam, zeros + base[n:], fiber, mask), v)
    return WeylForm._raw(a.ctx, a.trunc, out)


def is_in_Ifin(a: WeylForm, leaf: LeafSpec) -> bool:
    return reduce_mod_Ifin(a, leaf).is_zero()


def ideal_I_generators(ctx: ChartContext, trunc: int) -> list:
    """eta_i and dx^i: a generating set of I as a left ideal."""
    n = ctx.n
    return [WeylForm.eta(ctx, trunc, i) for i in range(1, n + 1)] + [WeylForm.dz(ctx, trunc, i) for i in range(1, n + 1)]


def ifin_generators(ctx: ChartContext, leaf: LeafSpec, trunc: int) -> list:
    return ideal_I_generators(ctx, trunc) + [WeylForm.from_base(g, trunc, ctx) for g in leaf.generators()]
