"""Wall-clock timings for solve_r and a batch of star-product associativity checks.

    python scripts/timing.py configs/nonflat_n2.json --trunc 5 --triples 100
"""
import argparse
import random
import time

from adapted_star import solve_r, star
from adapted_star.config import load
from adapted_star.samples import rand_poly


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--trunc", type=int, default=None)
    ap.add_argument("--triples", type=int, default=100)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = load(args.config)
    t0 = time.perf_counter()
    st = solve_r(cfg.engine_config(args.trunc))
    t1 = time.perf_counter()
    print(f"solve_r: {t1 - t0:.3f} s, {st.iterations} iterations, {len(st.r)} terms in r")

    rng = random.Random(args.seed)
    bad = 0
    for _ in range(args.triples):
        f, g, h = (rand_poly(rng, cfg.n, args.degree, 3) for _ in range(3))
        bad += star(star(f, g, st), h, st) != star(f, star(g, h, st), st)
    t2 = time.perf_counter()
    print(f"{args.triples} associativity triples: {t2 - t1:.2f} s, {bad} failures")


if __name__ == "__main__":
    main()
