"""Last.fm friendship network with listened/tagged co-count covariates.

Runs the (s, R) grid and the R = 0 logistic-regression baseline on the same
20% hold-out.

    python scripts/run_lastfm.py data/hetrec2011-lastfm-2k --ranks 10,20,30,42,50 \
        --budgets 270,370,470,570 --out results/lastfm_grid.csv
"""

import argparse
import logging
import os

import numpy as np

from lowrank_glm import TuningGrid, fit_glm_baseline, grid_search, holdout_split, predictive_auc
from lowrank_glm.datasets import load_lastfm
from lowrank_glm.io import save_rows


def numbers(cast):
    return lambda text: [cast(v) for v in text.split(",")]


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("directory", help="folder with the HetRec 2011 Last.fm .dat files")
    parser.add_argument("--ranks", type=numbers(int), default=[10, 20, 30, 42, 50])
    parser.add_argument("--budgets", type=numbers(float), default=[270.0, 370.0, 470.0, 570.0])
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="lastfm_grid.csv")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    A, X = load_lastfm(args.directory)
    logging.info("n=%d users, %d friendships", A.n, int(A.values.sum() // 2))
    grid = TuningGrid(args.ranks, args.budgets)
    res = grid_search(A, X, "bernoulli", grid, seed=args.seed, workers=args.workers)

    # grid_search draws its single split from the first child of SeedSequence(seed)
    split_seed = int(np.random.SeedSequence(args.seed).spawn(1)[0].generate_state(1, np.uint64)[0])
    split = holdout_split(A, grid.validation_fraction, split_seed)
    base = fit_glm_baseline(split.train, X, "bernoulli")
    base_auc = predictive_auc(A, base.mean, split.index_set)

    rows = [{"s": s, "R": R, "auc": auc} for (s, R), auc in res.table.items()]
    rows.append({"s": "glm", "R": 0.0, "auc": base_auc})
    save_rows(args.out, rows, ["s", "R", "auc"])
    logging.info("best cell s=%s R=%g AUC=%.3f; baseline AUC=%.3f; final beta=%s",
                 res.best[0], res.best[1], res.table[res.best], base_auc, res.final.beta)


if __name__ == "__main__":
    main()
