#!/usr/bin/env python3
"""Sparsity, iteration count and 1-NN accuracy along a lambda path for each
sparse solver, on paper-shaped synthetic data."""
import argparse

import numpy as np

from rkspca import ExperimentSpec, SolverConfig, center, fit_sparse_pca, run_experiment, synth_faces
from rkspca.errors import OverShrinkageError
from rkspca.spca import Method, default_step


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--noise", type=float, default=1.0)
    ap.add_argument("--d", type=int, default=20)
    ap.add_argument("--lams", default="0,10,30,100,200,300")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    train, test = synth_faces(15, 8, 3, 1024, args.noise, args.seed)
    X = center(train)[0].features
    print(f"default step t = {default_step(X, args.seed):.3g}")
    print(f"{'method':<6} {'lambda':>7} {'median nnz':>10} {'iters':>6} {'seconds':>8} {'1-NN acc':>8}")
    for method in (Method.ISTA, Method.RK_COARSE, Method.RK4):
        for lam in map(float, args.lams.split(",")):
            cfg = SolverConfig(method=method, lam=lam, seed=args.seed)
            try:
                B, tr = fit_sparse_pca(X, args.d, cfg)
            except OverShrinkageError as exc:
                print(f"{method.value:<6} {lam:>7g}  {exc}")
                continue
            acc = run_experiment(train, test, ExperimentSpec(reduction=method, d=args.d, solver=cfg)).accuracy
            nnz = int(np.median(np.count_nonzero(B.matrix, axis=0)))
            print(f"{method.value:<6} {lam:>7g} {nnz:>10} {tr.iterations_used:>6} {tr.wall_seconds:>8.2f} {acc:>8.2f}")


if __name__ == "__main__":
    main()
