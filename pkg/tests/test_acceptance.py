"""The nine acceptance criteria, exact equality throughout.

Each criterion is a function returning (ok, detail); the pytest wrappers
record the outcome for the terminal summary and print one line apiece.
Run as a script for the same lines without pytest.
"""
import itertools
import os
import random
import subprocess
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from adapted_star import fedosov as fed
from adapted_star.cli import main as cli_main
from adapted_star.connection import ConnectionSpec, curvature_gamma, nabla
from adapted_star.ideals import LeafSpec, ideal_I_generators, ifin_generators, in_ideal_I, is_in_Ifin
from adapted_star.koszul import delta, delta_inv, tau
from adapted_star.ring import BasePoly, partial
from adapted_star.samples import rand_in_I, rand_left_multiple, rand_poly, rand_weyl
from adapted_star.weyl import ChartContext, WeylForm, ad_over_lambda, circ, normal_words, pbw_oracle, render

import conftest
from conftest import ROOT, nonflat_spec_n1, nonflat_spec_n2

CASES = 200
TRIPLES = 100
C1, C2 = ChartContext(1), ChartContext(2)

TITLES = {
    1: "homotopy identity",
    2: "PBW oracle equivalence and confluence",
    3: "circ associativity",
    4: "curvature identity and Gamma in I",
    5: "Fedosov flatness and fixed point",
    6: "ideal coherence",
    7: "star-product laws",
    8: "leaf module structure",
    9: "CLI goldens and check exit codes",
}


def _specs():
    return [
        (C1, ConnectionSpec.flat(1), ["2"]),
        (C1, nonflat_spec_n1(), ["-1/3"]),
        (C2, ConnectionSpec.flat(2), ["2", "1/2"]),
        (C2, nonflat_spec_n2(), ["1", "2"]),
    ]


def _fail(what, **inputs):
    parts = ", ".join(f"{k} = {render(v) if isinstance(v, WeylForm) else v}" for k, v in inputs.items())
    return False, f"{what}: {parts}"[:500]


def criterion_1():
    rng = random.Random("acceptance:1")
    K = 6
    start = time.perf_counter()
    for _ in range(CASES):
        a = rand_weyl(rng, C2, K, max_terms=6, max_base_degree=3)
        # delta lowers the filtration, so delta_inv(delta(a)) is exact one degree below the top
        wide = a.with_trunc(K + 1)
        res = (delta(delta_inv(wide)) + delta_inv(delta(wide)) + tau(wide) - wide).with_trunc(K)
        if res:
            return _fail("defect", a=a, residual=res)
    elapsed = time.perf_counter() - start
    if elapsed >= 5:
        return False, f"{CASES} cases took {elapsed:.2f} s (limit 5 s)"
    return True, f"{CASES} cases, N=2, K=6, {elapsed:.2f} s"


def _fiber_monomials(ctx, degree):
    for e in itertools.product(range(degree + 1), repeat=ctx.dim):
        if sum(e) <= degree:
            yield e


def criterion_2():
    pairs = 0
    for ctx in (C1, C2):
        K = 4
        z = (0,) * ctx.dim
        for fa in _fiber_monomials(ctx, K):
            for fb in _fiber_monomials(ctx, K - sum(fa)):
                a = WeylForm(ctx, K, {(0, z, fa, 0): 1})
                b = WeylForm(ctx, K, {(0, z, fb, 0): 1})
                word = [k for e in (fa, fb) for k in range(1, ctx.dim + 1) for _ in range(e[k - 1])]
                if circ(a, b) != pbw_oracle(ctx, word, trunc=K):
                    return _fail("circ differs from rewriting", a=a, b=b)
                pairs += 1
    rng = random.Random("acceptance:2")
    for _ in range(CASES):
        word = [rng.randint(1, 4) for _ in range(rng.randint(0, 6))]
        ref = normal_words(C2, word)
        for _ in range(3):
            if normal_words(C2, word, random.Random(rng.random())) != ref:
                return False, f"rewrite order changes the normal form of {word}"
    return True, f"{pairs} exhaustive pairs, {CASES} words x 3 random orders"


def criterion_3():
    rng = random.Random("acceptance:3")
    K = 6
    for _ in range(CASES):
        a, b, c = (rand_weyl(rng, C2, K, max_terms=4, max_base_degree=2) for _ in range(3))
        if circ(circ(a, b), c) != circ(a, circ(b, c)):
            return _fail("associator", a=a, b=b, c=c)
    return True, f"{CASES} triples, N=2, K=6"


def criterion_4():
    rng = random.Random("acceptance:4")
    K = 5
    per = CASES // 4
    for ctx, spec, _ in _specs():
        gamma = curvature_gamma(spec, ctx, K)
        if not in_ideal_I(gamma):
            return _fail("Gamma not in I", Gamma=gamma)
        if spec.is_flat() != gamma.is_zero():
            return _fail("Gamma vanishing does not match flatness", Gamma=gamma)
        for _ in range(per):
            a = rand_weyl(rng, ctx, K, max_terms=4, max_base_degree=3, max_form_degree=1)
            res = nabla(nabla(a, spec), spec) - ad_over_lambda(gamma, a)
            if res:
                return _fail(f"curvature identity (N={ctx.n})", a=a, residual=res)
    return True, f"{per * 4} cases over 2 flat and 2 curved connections, K={K}"


def criterion_5():
    rng = random.Random("acceptance:5")
    K = 5
    per = CASES // 4
    for ctx, spec, leaf in _specs():
        st = fed.build_state(ctx, spec, leaf, K)
        res = fed.fedosov_residual(st).truncate(K - 1)
        if res:
            return _fail("fixed-point residual", residual=res)
        for _ in range(per):
            a = rand_weyl(rng, ctx, K, max_terms=4, max_base_degree=3)
            res = fed.fedosov_D(fed.fedosov_D(a, st), st).truncate(K - 2)
            if res:
                return _fail("D^2", a=a, residual=res)
    return True, f"{per * 4} cases, residual 0 for 4 connections, K={K}"


def criterion_6():
    rng = random.Random("acceptance:6")
    K = 5
    per = CASES // 4
    count = 0
    for ctx, spec, leaf in _specs():
        st = fed.build_state(ctx, spec, leaf, K)
        leaf = st.config.leaf
        if not in_ideal_I(st.r):
            return _fail("r not in I", r=st.r)
        gens_I = ideal_I_generators(ctx, K)
        gens_fin = ifin_generators(ctx, leaf, K)
        samples_I = [rand_in_I(rng, ctx, K, max_base_degree=3, max_form_degree=2) for _ in range(per)]
        samples_fin = [rand_left_multiple(rng, gens_fin, K, max_terms=3, max_base_degree=3, max_form_degree=1) for _ in range(per)]
        maps_I = {"delta": delta, "delta_inv": delta_inv, "nabla": lambda a: nabla(a, spec)}
        for name, fn in maps_I.items():
            for g in gens_I + samples_I:
                if not in_ideal_I(fn(g)):
                    return _fail(f"{name} leaves I", a=g)
                count += 1
        maps_fin = {
            "D": lambda a: fed.fedosov_D(a, st).truncate(K - 1),
            "Q": lambda a: fed.q_map(a, st),
        }
        for name, fn in maps_fin.items():
            for g in gens_fin + samples_fin:
                if not is_in_Ifin(fn(g), leaf):
                    return _fail(f"{name} leaves I_fin", a=g)
                count += 1
    return True, f"r in I for 4 connections; {count} generator and sample images checked"


def _poisson(f, g):
    n = f.n
    out = BasePoly.zero(n)
    for i in range(1, n + 1):
        out = out + partial(f, i) * partial(g, n + i) - partial(f, n + i) * partial(g, i)
    return out


STAR_RUNS = [
    (C1, ConnectionSpec.flat(1), ["2"], 6, 30),
    (C1, nonflat_spec_n1(), ["-1/3"], 6, 30),
    (C2, ConnectionSpec.flat(2), ["2", "1/2"], 4, 300),
    (C2, nonflat_spec_n2(), ["1", "2"], 5, 300),
]


def criterion_7():
    details = []
    for ctx, spec, leaf, K, budget in STAR_RUNS:
        rng = random.Random(f"acceptance:7:{ctx.n}:{spec.is_flat()}")
        start = time.perf_counter()
        st = fed.build_state(ctx, spec, leaf, K)
        order = K // 2
        one = BasePoly.const(ctx.n, 1)
        for _ in range(TRIPLES):
            f, g, h = (rand_poly(rng, ctx.n, max_degree=3, max_terms=3) for _ in range(3))
            fg, gf = fed.star(f, g, st), fed.star(g, f, st)
            if fed.star(f, one, st) != fed.Series.constant(f, order) or fed.star(one, f, st) != fed.Series.constant(f, order):
                return False, f"unit fails for f = {f}"
            if fg[0] != f * g:
                return False, f"classical limit fails for f = {f}, g = {g}"
            comm = fg - gf
            if not comm[0].is_zero() or comm[1] != _poisson(f, g):
                return False, f"first-order bracket fails for f = {f}, g = {g}"
            if fed.star(fg, h, st) != fed.star(f, fed.star(g, h, st), st):
                return False, f"associativity fails for f = {f}, g = {g}, h = {h}"
            if spec.is_flat() and fg != fed.flat_star_oracle(f, g, order):
                return False, f"flat oracle mismatch for f = {f}, g = {g}"
        elapsed = time.perf_counter() - start
        tag = f"N={ctx.n} K={K} {'flat' if spec.is_flat() else 'curved'}"
        if elapsed > budget:
            return False, f"{tag} took {elapsed:.1f} s (budget {budget} s)"
        details.append(f"{tag} {elapsed:.1f}s")
    return True, f"{TRIPLES} triples each: " + ", ".join(details)


def criterion_8():
    rng = random.Random("acceptance:8")
    per = CASES // 4
    for ctx, spec, leaf, K in [(c, s, l, 5 if c.n == 1 else 4) for c, s, l in _specs()]:
        st = fed.build_state(ctx, spec, leaf, K)
        n, order = ctx.n, K // 2
        leaf = st.config.leaf
        for _ in range(per):
            f, g = rand_poly(rng, n, 2, 3), rand_poly(rng, n, 2, 3)
            psi = rand_poly(rng, n, 3, 3, p_only=True)
            if fed.module_action(BasePoly.const(n, 1), psi, st) != fed.Series.constant(psi, order):
                return False, f"unit action fails on psi = {psi}"
            lhs = fed.module_action(fed.star(f, g, st), psi, st)
            if lhs != fed.module_action(f, fed.module_action(g, psi, st), st):
                return False, f"module law fails: f = {f}, g = {g}, psi = {psi}"
            ext = psi + leaf.generators()[rng.randrange(n)] * rand_poly(rng, n, 2, 3)
            if fed.act_on_extension(f, ext, st) != fed.module_action(f, psi, st):
                return False, f"extension dependence: f = {f}, psi = {psi}, extension = {ext}"
            if not spec.is_flat():
                continue
            for i in range(1, n + 1):
                x, p = BasePoly.x(n, i), BasePoly.p(n, i)
                Ppsi = fed.module_action(p, psi, st)
                Xpsi = fed.module_action(x, psi, st)
                if Ppsi != fed.Series.constant(p * psi, order):
                    return False, f"P is not multiplication on psi = {psi}"
                if Xpsi != fed.Series(n, [psi * leaf.c[i - 1], partial(psi, n + i)], order):
                    return False, f"X is not c + lambda d/dp on psi = {psi}"
                for j in range(1, n + 1):
                    pj = BasePoly.p(n, j)
                    xp = fed.module_action(x, fed.module_action(pj, psi, st), st)
                    px = fed.module_action(pj, fed.module_action(x, psi, st), st)
                    want = fed.Series.constant(psi if i == j else BasePoly.zero(n), order).times_lambda()
                    if xp - px != want:
                        return False, f"[X{i}, P{j}] fails on psi = {psi}"
    return True, f"{per * 4} cases over 4 connections; momentum representation on the flat ones"


def _cli(argv):
    proc = subprocess.run([sys.executable, "-m", "adapted_star", *argv], capture_output=True, text=True, encoding="utf-8")
    return proc.returncode, proc.stdout


def criterion_9():
    flat = f"{ROOT}/configs/flat_n1.json"
    goldens = [
        (["star", "x1", "p1"], "star_x1_p1_flat_n1.txt"),
        (["module-action", "x1", "p1"], "module_action_x1_p1_flat_n1.txt"),
        (["validate"], "validate_flat_n1.txt"),
    ]
    for argv, name in goldens:
        code, out = _cli([*argv, "--config", flat])
        with open(f"{ROOT}/tests/golden/{name}", encoding="utf-8") as fh:
            want = fh.read()
        if code != 0 or out != want:
            return False, f"{' '.join(argv)} differs from golden {name}"
    for name in ("flat_n1", "nonflat_n1", "flat_n2", "nonflat_n2"):
        code, out = _cli(["check", "--config", f"{ROOT}/configs/{name}.json"])
        if code != 0:
            return False, f"check on {name} exited {code}"
    for name in ("corrupt_asymmetric", "corrupt_self_parallel"):
        code, _ = _cli(["check", "--config", f"{ROOT}/tests/data/{name}.json"])
        if code != 2:
            return False, f"check on {name} exited {code}, expected 2"
    return True, "3 goldens byte-exact; check exits 0 on 4 shipped configs, 2 on 2 corrupted ones"


CRITERIA = {k: globals()[f"criterion_{k}"] for k in TITLES}


def _line(k, ok, detail):
    return f"criterion {k}: {'PASS' if ok else 'FAIL'}  {TITLES[k]} ({detail})"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k]()
    conftest.ACCEPTANCE[k] = (ok, TITLES[k])
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]()
        failed += not ok
        print(_line(k, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
