"""Seeded random inputs for the invariant suite and the tests."""
from __future__ import annotations

import random

from .ring import BasePoly, Rational
from .weyl import ChartContext, WeylForm, circ, mask_of

_COEFFS = [Rational(k) for k in (-3, -2, -1, 1, 2, 3)] + [Rational(1, 2), Rational(-1, 3), Rational(2, 3)]


def rand_coeff(rng: random.Random):
    return rng.choice(_COEFFS)


def rand_exponent(rng: random.Random, size: int, degree: int) -> list:
    e = [0] * size
    for _ in range(degree):
        e[rng.randrange(size)] += 1
    return e


def rand_poly(rng: random.Random, n: int, max_degree: int = 3, max_terms: int = 4, p_only: bool = False) -> BasePoly:
    """A random polynomial of total degree <= max_degree; p_only keeps x out."""
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        e = rand_exponent(rng, n, rng.randint(0, max_degree)) if p_only else rand_exponent(rng, 2 * n, rng.randint(0, max_degree))
        if p_only:
            e = [0] * n + e
        terms[tuple(e)] = rand_coeff(rng)
    return BasePoly(n, terms)


def rand_weyl(
    rng: random.Random,
    ctx: ChartContext,
    trunc: int,
    max_terms: int = 5,
    max_base_degree: int = 2,
    form_degree: int | None = None,
    max_form_degree: int | None = None,
) -> WeylForm:
    """Random terms spread over fiber, lambda and form degrees, filtration <= trunc."""
    dim = ctx.dim
    top_form = dim if max_form_degree is None else min(max_form_degree, dim)
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        lam = rng.randint(0, trunc // 2)
        fiber = rand_exponent(rng, dim, rng.randint(0, trunc - 2 * lam))
        base = rand_exponent(rng, dim, rng.randint(0, max_base_degree))
        deg = rng.randint(0, top_form) if form_degree is None else form_degree
        mask = mask_of(rng.sample(range(1, dim + 1), deg))
        terms[(lam, tuple(base), tuple(fiber), mask)] = rand_coeff(rng)
    return WeylForm(ctx, trunc, terms)


def rand_in_I(rng: random.Random, ctx: ChartContext, trunc: int, **kw) -> WeylForm:
    """A random element of the polarization ideal: every term gets an eta or a dx."""
    n = ctx.n
    a = rand_weyl(rng, ctx, max(trunc - 1, 0), **kw)
    out = {}
    for (lam, base, fiber, mask), c in a.items():
        if any(fiber[n:]) or mask & ((1 << n) - 1):
            out[(lam, base, fiber, mask)] = c
            continue
        i = rng.randrange(n)
        free_dx = [j for j in range(n) if not mask & (1 << j)]
        if free_dx and rng.random() < 0.5:
            mask |= 1 << rng.choice(free_dx)
        else:
            f = list(fiber)
            f[n + i] += 1
            fiber = tuple(f)
        out[(lam, base, fiber, mask)] = c
    return WeylForm(ctx, trunc, out)


def rand_left_multiple(rng: random.Random, gens: list, trunc: int, **kw) -> WeylForm:
    """sum b_i o g_i with random b_i: a random element of the left ideal the g_i generate."""
    ctx = gens[0].ctx
    total = WeylForm.zero(ctx, trunc)
    for g in rng.sample(gens, min(len(gens), 2)):
        total = total + circ(rand_weyl(rng, ctx, trunc, **kw), g)
    return total
