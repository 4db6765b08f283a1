"""Ordinal embedding from planted triplet comparisons.

Plants low-dimensional points, draws noisy "item i is closer to j than
to k" comparisons, holds out a test split, and fits a Gram matrix by
minimizing the logistic triplet loss plus a trace penalty.  Prints the
held-out violation rate as training proceeds for the adaptive
variance-reduced solver and the plain stochastic baseline.
"""

import argparse

import numpy as np

from factored_sdp.cli import test_error
from factored_sdp.init import init_scheme3
from factored_sdp.linalg import gram
from factored_sdp.objective import TripletProblem, estimate_smoothness
from factored_sdp.solvers import SolverConfig, run_sfgd, run_svrg
from factored_sdp.stepsize import sbb


def planted_triplets(p, dim, count, noise, seed):
    """Triplets ordered by planted distances, each flipped with prob noise."""
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((p, dim))
    out = []
    while len(out) < count:
        i, j, k = (int(v) for v in rng.integers(0, p, size=3))
        if i == j or i == k or j == k:
            continue
        d2_ij = float(np.sum((points[i] - points[j]) ** 2))
        d2_ik = float(np.sum((points[i] - points[k]) ** 2))
        if d2_ij == d2_ik:
            continue
        if d2_ij > d2_ik:
            j, k = k, j
        if noise > 0.0 and rng.uniform() < noise:
            j, k = k, j
        out.append((i, j, k))
    return np.asarray(out, dtype=int)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=50, help="number of items")
    ap.add_argument("--dim", type=int, default=2, help="planted dimension")
    ap.add_argument("--count", type=int, default=4000)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--epochs", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    triplets = planted_triplets(args.p, args.dim, args.count, args.noise, args.seed)
    perm = np.random.default_rng(args.seed + 1).permutation(args.count)
    n_train = int(round(0.8 * args.count))
    train, test = triplets[perm[:n_train]], triplets[perm[n_train:]]
    obj = TripletProblem(args.p, train, lam=1e-2)
    print(f"{args.p} items in {args.dim}-d, {n_train} train / "
          f"{len(test)} test triplets, label noise {args.noise:.0%}")

    U0 = init_scheme3(args.p, args.dim, 1.0, args.seed + 7)
    metric = lambda X: test_error(X, test)

    rng = np.random.default_rng(args.seed + 2)
    pairs = [
        (gram(rng.standard_normal((args.p, args.dim))),
         gram(rng.standard_normal((args.p, args.dim))))
        for _ in range(8)
    ]
    L_hat, _ = estimate_smoothness(obj, pairs)

    records = {}
    cfg = SolverConfig(algorithm="svrg-sbb", r=args.dim, epochs=args.epochs,
                       seed=args.seed, m=obj.n,
                       schedule=sbb(0.02 * L_hat, obj.n, eta0=1.0))
    records["svrg-sbb"] = run_svrg(obj, cfg, U0, metric=metric)
    cfg = SolverConfig(algorithm="sfgd", r=args.dim, epochs=args.epochs,
                       seed=args.seed, eta0=2.0, t0=float(obj.n))
    records["sfgd"] = run_sfgd(obj, cfg, U0, metric=metric)

    print(f"\n{'epoch':>5}  {'svrg-sbb':>9}  {'sfgd':>9}   (held-out violation rate)")
    stride = max(1, args.epochs // 10)
    rows = {name: {row.epoch: row for row in rec.rows}
            for name, rec in records.items()}
    for epoch in list(range(0, args.epochs, stride)) + [args.epochs]:
        a = rows["svrg-sbb"][epoch].metric
        b = rows["sfgd"][epoch].metric
        print(f"{epoch:>5}  {a:>9.3f}  {b:>9.3f}")

    print(f"\nchance level is ~0.5; the label-noise floor is {args.noise:.3f}. "
          "Both runs recover the\nordering well below chance, the "
          "variance-reduced one in fewer epochs; the trace\npenalty that "
          "keeps the adaptive step stable also biases distances, so the "
          "floor\nitself stays out of reach.  Shrinking lam below ~3e-3 "
          "hands the secant step a\nsaturated loss and it breaks out "
          "(see step_size_breakout.py).")


if __name__ == "__main__":
    main()
