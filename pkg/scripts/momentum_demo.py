"""Leaf action of x_i and p_i on a few momentum-space polynomials.

With a flat connection p acts by multiplication and x by c + lambda d/dp,
so [X_i, P_i] = lambda.  The curved config shows lambda^2 corrections.

    python scripts/momentum_demo.py [configs/nonflat_n2.json ...]
"""
import os
import sys

from adapted_star import BasePoly, module_action, solve_r
from adapted_star.config import load

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir)
DEFAULT = [os.path.join(ROOT, "configs", f) for f in ("flat_n2.json", "nonflat_n2.json")]


def show(path):
    cfg = load(path)
    state = solve_r(cfg.engine_config())
    n = cfg.n
    print(f"== {os.path.basename(path)} (N={n}, K={cfg.trunc_K}, leaf x = {tuple(str(c) for c in cfg.leaf)})")
    for src in ("1", "p1", "p1^3 - 2*p2"):
        psi = cfg.parse(src)
        print(f"psi = {src}")
        for i in range(1, n + 1):
            x, p = BasePoly.x(n, i), BasePoly.p(n, i)
            xp = module_action(x, module_action(p, psi, state), state)
            px = module_action(p, module_action(x, psi, state), state)
            print(f"  P{i} psi = {module_action(p, psi, state).render()}")
            print(f"  X{i} psi = {module_action(x, psi, state).render()}")
            print(f"  [X{i}, P{i}] psi = {(xp - px).render()}")


if __name__ == "__main__":
    for path in sys.argv[1:] or DEFAULT:
        show(path)
