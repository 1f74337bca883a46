"""Koszul differential, its contracting homotopy and the projection tau.

On normal forms these act through the symmetric-algebra picture:

    delta     = sum_k u(e_k) ^ d/dy^k          (bidegree (-1, +1))
    delta_inv = 1/(m+n) sum_j u^{-1}(dz^j) * i(dz^j)   on S^m (x) Lambda^n

so that delta delta_inv + delta_inv delta + tau = Id.
"""
from __future__ import annotations

from .ring import Rational
from .weyl import WeylForm, _acc, _popcount, wedge_sign


def delta(a: WeylForm) -> WeylForm:
    ctx = a.ctx
    out: dict = {}
    for (lam, base, fiber, mask), c in a.items():
        for k, e in enumerate(fiber, 1):
            if not e:
                continue
            j, s = ctx.u(k)
            bit = 1 << (j - 1)
            sign = wedge_sign(bit, mask)
            if not sign:
                continue
            f = list(fiber)
            f[k - 1] -= 1
            _acc(out, (lam, base, tuple(f), mask | bit), c * e * s * sign)
    return WeylForm._trusted(ctx, a.trunc, out)


def delta_inv(a: WeylForm) -> WeylForm:
    ctx = a.ctx
    out: dict = {}
    for (lam, base, fiber, mask), c in a.items():
        if not mask:
            continue
        weight = Rational(1, sum(fiber) + _popcount(mask))
        rest = mask
        while rest:
            bit = rest & -rest
            rest ^= bit
            j = bit.bit_length()
            # pulling dz^j to the front gives the alternating sign
            sign = wedge_sign(bit, mask ^ bit)
            k, s = ctx.u_inv(j)
            f = list(fiber)
            f[k - 1] += 1
            _acc(out, (lam, base, tuple(f), mask ^ bit), c * weight * sign * s)
    return WeylForm._trusted(ctx, a.trunc, out)


def tau(a: WeylForm) -> WeylForm:
    """Projection onto fiber degree 0 and form degree 0; lambda powers kept."""
    return WeylForm._raw(a.ctx, a.trunc, {k: c for k, c in a.items() if not k[3] and not any(k[2])})


def homotopy_defect(a: WeylForm) -> WeylForm:
    """delta delta_inv a + delta_inv delta a + tau a - a.

    delta_inv raises the filtration by one, so the work is done one degree
    above ``a.trunc``; the result is exactly zero for every ``a``.
    """
    b = a.with_trunc(a.trunc + 1)
    return (delta(delta_inv(b)) + delta_inv(delta(b)) + tau(b) - b).with_trunc(a.trunc)
