"""The invariant suite run by ``adapted-star check``.

Every check draws its random inputs from ``random.Random(f"{seed}:{name}")``
so reports are reproducible byte for byte.  A check returns ``None`` on
success or a rendered counterexample.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

from . import fedosov as fed
from .config import CheckSettings
from .connection import (
    ConnectionSpec,
    curvature_gamma,
    d_base,
    nabla,
    nabla_frame,
    ordered_curvature,
    symmetric_curvature,
    validate_connection,
)
from .ideals import (
    LeafSpec,
    ideal_I_generators,
    ifin_generators,
    in_ideal_I,
    in_ideal_Lambda,
    is_in_Ifin,
    reduce_mod_Ifin,
    split_forms,
)
from .koszul import delta, delta_inv, tau
from .parse import render_poly
from .ring import BasePoly, partial, substitute_x
from .samples import rand_in_I, rand_left_multiple, rand_poly, rand_weyl
from .weyl import ChartContext, WeylForm, ad_over_lambda, circ, filtration_degree, render

CLIP = 400


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "PASS", "FAIL" or "SKIP"
    cases: int
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "FAIL"

    def line(self) -> str:
        head = f"{self.status} {self.name} ({self.cases} case{'s' if self.cases != 1 else ''})"
        return head + (f": {self.detail}" if self.detail else "")


def _clip(text: str) -> str:
    return text if len(text) <= CLIP else text[:CLIP] + " ..."


def show(value) -> str:
    if isinstance(value, WeylForm):
        return _clip(render(value))
    if isinstance(value, BasePoly):
        return _clip(render_poly(value))
    if isinstance(value, fed.Series):
        return _clip(value.render())
    return _clip(str(value))


def counterexample(inputs: dict, residual) -> str:
    parts = [f"{k} = {show(v)}" for k, v in inputs.items()]
    return "; ".join(parts) + f"; residual = {show(residual)}"


class Harness:
    """Everything a check needs, built lazily from one configuration."""

    def __init__(self, ctx: ChartContext, spec: ConnectionSpec, leaf: LeafSpec, trunc_K: int, settings: CheckSettings, max_iter=None):
        self.ctx = ctx
        self.spec = spec
        self.leaf = leaf
        self.K = trunc_K
        self.settings = settings
        self.max_iter = max_iter

    @cached_property
    def report(self):
        return validate_connection(self.spec, self.ctx)

    @cached_property
    def state(self) -> fed.FedosovState:
        return fed.solve_r(fed.EngineConfig(self.ctx, self.spec, self.leaf, self.K, self.max_iter))

    @cached_property
    def gamma(self) -> WeylForm:
        return curvature_gamma(self.spec, self.ctx, self.K)

    @property
    def order(self) -> int:
        return self.K // 2

    def weyl(self, rng, **kw) -> WeylForm:
        kw.setdefault("max_base_degree", self.settings.max_degree)
        return rand_weyl(rng, self.ctx, self.K, **kw)

    def poly(self, rng, **kw) -> BasePoly:
        kw.setdefault("max_degree", self.settings.max_degree)
        kw.setdefault("max_terms", 3)
        return rand_poly(rng, self.ctx.n, **kw)

    def lift(self, q: BasePoly) -> WeylForm:
        return WeylForm.from_base(q, self.K, self.ctx)


@dataclass(frozen=True)
class Check:
    name: str
    fn: Callable
    needs_connection: bool = False
    flat_only: bool = False
    per_sample: bool = True


REGISTRY: list = []


def check(name: str, needs_connection: bool = False, flat_only: bool = False, per_sample: bool = True):
    def wrap(fn):
        REGISTRY.append(Check(name, fn, needs_connection, flat_only, per_sample))
        return fn

    return wrap


# koszul


@check("koszul/homotopy-identity")
def _homotopy(h: Harness, rng):
    a = h.weyl(rng)
    res = delta(delta_inv(a)) + delta_inv(delta(a)) + tau(a) - a
    # delta lowers the filtration by one, so compare below the top degree
    res = res.truncate(h.K - 1)
    return None if res.is_zero() else counterexample({"a": a}, res)


@check("koszul/delta-squared")
def _dd(h: Harness, rng):
    a = h.weyl(rng)
    res = delta(delta(a))
    return None if res.is_zero() else counterexample({"a": a}, res)


@check("koszul/delta-inv-squared")
def _dinv2(h: Harness, rng):
    a = h.weyl(rng)
    res = delta_inv(delta_inv(a))
    return None if res.is_zero() else counterexample({"a": a}, res)


@check("koszul/bidegrees")
def _bideg(h: Harness, rng):
    m = rng.randint(0, h.K)
    nf = rng.randint(0, h.ctx.dim)
    a = h.weyl(rng, form_degree=nf).component(fiber_degree=m)
    for name, out, dm, dn in (("delta", delta(a), -1, 1), ("delta_inv", delta_inv(a), 1, -1)):
        if out and (out.fiber_degrees() != {m + dm} or out.form_degrees() != {nf + dn}):
            return counterexample({"a": a, "map": name}, out)
    return None


@check("koszul/degree-zero-cohomology")
def _h0(h: Harness, rng):
    # on form degree 0, delta_inv delta = Id - tau: a closed element is its tau-part
    a = h.weyl(rng, form_degree=0)
    res = delta_inv(delta(a)) - (a - tau(a))
    return None if res.truncate(h.K - 1).is_zero() else counterexample({"a": a}, res)


# connection


@check("connection/admissible", per_sample=False)
def _admissible(h: Harness, rng):
    return None if h.report.ok else str(h.report)


@check("connection/forms-exterior-derivative", needs_connection=True)
def _nabla_forms(h: Harness, rng):
    a = h.weyl(rng, max_terms=4)
    a = WeylForm._raw(h.ctx, h.K, {k: c for k, c in a.items() if not any(k[2])})
    res = nabla(a, h.spec) - d_base(a)
    if res:
        return counterexample({"a": a}, res)
    res = d_base(d_base(a))
    return None if res.is_zero() else counterexample({"a": a, "d^2": "nonzero"}, res)


@check("connection/frame-formula", needs_connection=True, per_sample=False)
def _frame(h: Harness, rng):
    for j in range(1, h.ctx.dim + 1):
        e = WeylForm.generator(h.ctx, h.K, j)
        res = nabla(e, h.spec) - nabla_frame(h.ctx, h.spec, h.K, j)
        if res:
            return counterexample({"e": e}, res)
    return None


@check("connection/leibniz", needs_connection=True)
def _leibniz(h: Harness, rng):
    a = h.weyl(rng, max_terms=3, max_form_degree=1)
    b = h.weyl(rng, max_terms=3, max_form_degree=1)
    res = nabla(circ(a, b), h.spec) - circ(nabla(a, h.spec), b)
    for deg in a.form_degrees():
        part = a.component(form_degree=deg)
        res = res - circ(part, nabla(b, h.spec)) * (-1) ** deg
    return None if res.is_zero() else counterexample({"a": a, "b": b}, res)


@check("connection/curvature-identity", needs_connection=True)
def _curv(h: Harness, rng):
    a = h.weyl(rng, max_terms=3, max_form_degree=1)
    res = nabla(nabla(a, h.spec), h.spec) - ad_over_lambda(h.gamma, a)
    return None if res.is_zero() else counterexample({"a": a}, res)


@check("connection/curvature-in-I", needs_connection=True, per_sample=False)
def _curv_I(h: Harness, rng):
    bad = WeylForm._raw(h.ctx, h.K, {k: c for k, c in h.gamma.items() if not in_ideal_I(WeylForm._raw(h.ctx, h.K, {k: c}))})
    return None if bad.is_zero() else counterexample({"Gamma": h.gamma}, bad)


@check("connection/curvature-shape", needs_connection=True, per_sample=False)
def _curv_shape(h: Harness, rng):
    g = h.gamma
    if g.is_zero():
        return None if h.spec.is_flat() else "Gamma vanishes for a curved connection"
    if g.form_degrees() != {2} or filtration_degree(g) != 2 or any(sum(k[2]) + 2 * k[0] != 2 for k in g.keys()):
        return counterexample({"Gamma": g}, "form degree or filtration degree is not 2")
    res = g - ordered_curvature(h.spec, h.ctx, h.K)
    if any(any(k[2]) for k in res.keys()):
        return counterexample({"Gamma": g}, res)
    res = g - symmetric_curvature(h.spec, h.ctx, h.K)
    if any(any(k[2]) for k in res.keys()):
        return counterexample({"Gamma": g}, res)
    return None


@check("connection/bianchi", needs_connection=True, per_sample=False)
def _bianchi(h: Harness, rng):
    res = nabla(h.gamma, h.spec)
    if res:
        return counterexample({"Gamma": h.gamma}, res)
    res = delta(h.gamma)
    return None if res.is_zero() else counterexample({"Gamma": h.gamma}, res)


@check("connection/preserves-I", needs_connection=True)
def _nabla_I(h: Harness, rng):
    a = rand_in_I(rng, h.ctx, h.K, max_base_degree=h.settings.max_degree, max_form_degree=1)
    for g in ideal_I_generators(h.ctx, h.K) + [a]:
        res = nabla(g, h.spec)
        if not in_ideal_I(res):
            return counterexample({"a": g}, res)
    return None


@check("connection/leaf-generators-to-Ifin", needs_connection=True, per_sample=False)
def _nabla_phi(h: Harness, rng):
    for g in h.leaf.generators():
        res = nabla(h.lift(g), h.spec)
        if not is_in_Ifin(res, h.leaf):
            return counterexample({"g": g}, reduce_mod_Ifin(res, h.leaf))
    return None


# ideals


@check("ideals/Ifin-left-ideal")
def _left_ideal(h: Harness, rng):
    b = h.weyl(rng, max_terms=3)
    for g in ifin_generators(h.ctx, h.leaf, h.K):
        prod = circ(b, g)
        if not is_in_Ifin(prod, h.leaf):
            return counterexample({"b": b, "g": g}, reduce_mod_Ifin(prod, h.leaf))
    for g in h.leaf.generators():
        prod = circ(h.lift(g), b)
        if not is_in_Ifin(prod, h.leaf):
            return counterexample({"g": g, "b": b}, reduce_mod_Ifin(prod, h.leaf))
    return None


@check("ideals/koszul-preserves-I")
def _koszul_I(h: Harness, rng):
    a = rand_in_I(rng, h.ctx, h.K, max_base_degree=h.settings.max_degree)
    for name, out in (("delta", delta(a)), ("delta_inv", delta_inv(a))):
        if not in_ideal_I(out):
            return counterexample({"a": a, "map": name}, out)
    return None


@check("ideals/tau-Ifin-in-Phi")
def _tau_phi(h: Harness, rng):
    a = rand_left_multiple(rng, ifin_generators(h.ctx, h.leaf, h.K), h.K, max_base_degree=h.settings.max_degree)
    t = fed.Series.from_weyl(tau(a), h.K // 2)
    res = t.map(lambda q: substitute_x(q, h.leaf.c))
    return None if res.is_zero() else counterexample({"a": a}, res)


@check("ideals/form-splitting")
def _splitting(h: Harness, rng):
    a = h.weyl(rng)
    lpart, ipart = split_forms(a)
    if lpart + ipart != a or not in_ideal_Lambda(ipart):
        return counterexample({"a": a}, ipart)
    n = h.ctx.n
    if any(k[3] & ((1 << n) - 1) for k in lpart.keys()):
        return counterexample({"a": a}, lpart)
    return None


@check("ideals/reduction")
def _reduction(h: Harness, rng):
    a = h.weyl(rng)
    rep = reduce_mod_Ifin(a, h.leaf)
    if reduce_mod_Ifin(rep, h.leaf) != rep:
        return counterexample({"a": a}, rep)
    res = a - rep
    return None if is_in_Ifin(res, h.leaf) else counterexample({"a": a}, reduce_mod_Ifin(res, h.leaf))


# fedosov


@check("fedosov/fixed-point-residual", needs_connection=True, per_sample=False)
def _residual(h: Harness, rng):
    res = fed.fedosov_residual(h.state).truncate(h.K - 1)
    return None if res.is_zero() else counterexample({"r": h.state.r}, res)


@check("fedosov/r-shape", needs_connection=True, per_sample=False)
def _r_shape(h: Harness, rng):
    r = h.state.r
    if r.is_zero():
        return None if h.gamma.is_zero() else "r vanishes although Gamma does not"
    if r.form_degrees() != {1} or filtration_degree(r) < 2:
        return counterexample({"r": r}, "r must be a 1-form of filtration degree >= 2")
    return None if in_ideal_I(r) else counterexample({"r": r}, "r is not in I")


@check("fedosov/D-squared", needs_connection=True)
def _DD(h: Harness, rng):
    a = h.weyl(rng, max_terms=3, max_form_degree=2)
    res = fed.fedosov_D(fed.fedosov_D(a, h.state), h.state).truncate(h.K - 2)
    return None if res.is_zero() else counterexample({"a": a}, res)


@check("fedosov/D-unit", needs_connection=True, per_sample=False)
def _D1(h: Harness, rng):
    res = fed.fedosov_D(WeylForm.scalar(h.ctx, h.K), h.state)
    return None if res.is_zero() else counterexample({"a": 1}, res)


@check("fedosov/flat-lifts", needs_connection=True)
def _flat_lifts(h: Harness, rng):
    f = h.poly(rng)
    res = fed.fedosov_D(fed.q_inverse(f, h.state), h.state).truncate(h.K - 1)
    return None if res.is_zero() else counterexample({"f": f}, res)


@check("fedosov/Q-intertwines", needs_connection=True)
def _intertwine(h: Harness, rng):
    a = h.weyl(rng, max_terms=3, max_form_degree=1)
    st = h.state
    res = (delta(fed.q_map(a, st)) - fed.q_map(fed.fedosov_D(a, st), st)).truncate(h.K - 1)
    return None if res.is_zero() else counterexample({"a": a}, res)


@check("fedosov/Q-inverse", needs_connection=True)
def _qinv(h: Harness, rng):
    a = h.weyl(rng, max_terms=3, max_form_degree=1)
    res = fed.q_map(fed.q_inverse(a, h.state), h.state) - a
    return None if res.is_zero() else counterexample({"a": a}, res)


@check("fedosov/D-preserves-Ifin", needs_connection=True)
def _D_ifin(h: Harness, rng):
    gens = ifin_generators(h.ctx, h.leaf, h.K)
    a = rand_left_multiple(rng, gens, h.K, max_terms=3, max_base_degree=h.settings.max_degree, max_form_degree=1)
    for g in gens + [a]:
        res = fed.fedosov_D(g, h.state).truncate(h.K - 1)
        if not is_in_Ifin(res, h.leaf):
            return counterexample({"g": g}, reduce_mod_Ifin(res, h.leaf))
    return None


@check("fedosov/Q-preserves-Ifin", needs_connection=True)
def _Q_ifin(h: Harness, rng):
    gens = ifin_generators(h.ctx, h.leaf, h.K)
    a = rand_left_multiple(rng, gens, h.K, max_terms=3, max_base_degree=h.settings.max_degree, max_form_degree=1)
    for g in gens + [a]:
        res = fed.q_map(g, h.state)
        if not is_in_Ifin(res, h.leaf):
            return counterexample({"g": g}, reduce_mod_Ifin(res, h.leaf))
    return None


@check("fedosov/star-unit", needs_connection=True)
def _star_unit(h: Harness, rng):
    f = h.poly(rng)
    one = BasePoly.const(h.ctx.n, 1)
    for res in (fed.star(f, one, h.state) - f, fed.star(one, f, h.state) - f):
        if not res.is_zero():
            return counterexample({"f": f}, res)
    return None


@check("fedosov/star-classical-limit", needs_connection=True)
def _classical(h: Harness, rng):
    f, g = h.poly(rng), h.poly(rng)
    res = fed.star(f, g, h.state)[0] - f * g
    return None if res.is_zero() else counterexample({"f": f, "g": g}, res)


def poisson(f: BasePoly, g: BasePoly) -> BasePoly:
    n = f.n
    out = BasePoly.zero(n)
    for i in range(1, n + 1):
        out = out + partial(f, i) * partial(g, n + i) - partial(f, n + i) * partial(g, i)
    return out


@check("fedosov/star-poisson", needs_connection=True)
def _poisson(h: Harness, rng):
    f, g = h.poly(rng), h.poly(rng)
    comm = fed.star(f, g, h.state) - fed.star(g, f, h.state)
    res = fed.Series(h.ctx.n, [comm[0], comm[1] - poisson(f, g)], 1)
    return None if res.is_zero() else counterexample({"f": f, "g": g}, res)


@check("fedosov/star-associative", needs_connection=True)
def _assoc(h: Harness, rng):
    f, g, k = h.poly(rng), h.poly(rng), h.poly(rng)
    st = h.state
    res = fed.star(fed.star(f, g, st), k, st) - fed.star(f, fed.star(g, k, st), st)
    return None if res.is_zero() else counterexample({"f": f, "g": g, "h": k}, res)


@check("fedosov/star-flat-oracle", needs_connection=True, flat_only=True)
def _oracle(h: Harness, rng):
    f, g = h.poly(rng), h.poly(rng)
    res = fed.star(f, g, h.state) - fed.flat_star_oracle(f, g, h.order)
    return None if res.is_zero() else counterexample({"f": f, "g": g}, res)


@check("fedosov/module-unit", needs_connection=True)
def _module_unit(h: Harness, rng):
    psi = h.poly(rng, p_only=True)
    res = fed.module_action(BasePoly.const(h.ctx.n, 1), psi, h.state) - psi
    return None if res.is_zero() else counterexample({"psi": psi}, res)


@check("fedosov/module-law", needs_connection=True)
def _module_law(h: Harness, rng):
    f, g = h.poly(rng), h.poly(rng)
    psi = h.poly(rng, p_only=True)
    st = h.state
    res = fed.module_action(fed.star(f, g, st), psi, st) - fed.module_action(f, fed.module_action(g, psi, st), st)
    return None if res.is_zero() else counterexample({"f": f, "g": g, "psi": psi}, res)


@check("fedosov/module-extension-independence", needs_connection=True)
def _ext(h: Harness, rng):
    f = h.poly(rng)
    psi = h.poly(rng, p_only=True)
    j = rng.randrange(h.ctx.n)
    q = h.poly(rng)
    ext = psi + h.leaf.generators()[j] * q
    res = fed.act_on_extension(f, ext, h.state) - fed.module_action(f, psi, h.state)
    return None if res.is_zero() else counterexample({"f": f, "psi": psi, "extension": ext}, res)


@check("fedosov/module-momentum-representation", needs_connection=True, flat_only=True)
def _momentum(h: Harness, rng):
    psi = h.poly(rng, p_only=True)
    st = h.state
    n = h.ctx.n
    for i in range(1, n + 1):
        x, p = BasePoly.x(n, i), BasePoly.p(n, i)
        res = fed.module_action(p, psi, st) - p * psi
        if not res.is_zero():
            return counterexample({"psi": psi, "f": p}, res)
        want = fed.Series(n, [psi * h.leaf.c[i - 1], partial(psi, n + i)], h.order)
        res = fed.module_action(x, psi, st) - want
        if not res.is_zero():
            return counterexample({"psi": psi, "f": x}, res)
    return None


@check("fedosov/module-canonical-commutation", needs_connection=True, flat_only=True)
def _ccr(h: Harness, rng):
    psi = h.poly(rng, p_only=True)
    st = h.state
    n = h.ctx.n
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            x, p = BasePoly.x(n, i), BasePoly.p(n, j)
            xp = fed.module_action(x, fed.module_action(p, psi, st), st)
            px = fed.module_action(p, fed.module_action(x, psi, st), st)
            want = fed.Series.constant(BasePoly.zero(n), h.order)
            if i == j:
                want = fed.Series.constant(psi, h.order).times_lambda()
            res = xp - px - want
            if not res.is_zero():
                return counterexample({"psi": psi, "i": i, "j": j}, res)
    return None


def run_checks(h: Harness, only: Callable[[str], bool] | None = None) -> list:
    """Run every registered check; connection-dependent ones are skipped if the connection is invalid."""
    results = []
    valid = h.report.ok
    for c in REGISTRY:
        if only is not None and not only(c.name):
            continue
        if c.needs_connection and not valid:
            results.append(CheckResult(c.name, "SKIP", 0, "connection is not admissible"))
            continue
        if c.flat_only and not h.spec.is_flat():
            results.append(CheckResult(c.name, "SKIP", 0, "flat connections only"))
            continue
        rng = random.Random(f"{h.settings.seed}:{c.name}")
        runs = h.settings.samples if c.per_sample else 1
        detail = None
        done = 0
        for _ in range(runs):
            done += 1
            detail = c.fn(h, rng)
            if detail is not None:
                break
        results.append(CheckResult(c.name, "PASS" if detail is None else "FAIL", done, detail or ""))
    return results
