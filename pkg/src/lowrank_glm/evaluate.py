"""Hold-out splits, predictive AUC, relative error and tuning by subsampling validation.

Held-out entries are set to zero in the training matrix and stay in the
likelihood; they are not masked out as missing. The hold-out universe is
either every unmasked entry (``"entries"``, the default) or only the
unmasked positive entries (``"edges"``).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .errors import AUCUndefinedError, InputError
from .fit import FitConfig, fit
from .glm import AdjacencyMatrix, as_adjacency

logger = logging.getLogger(__name__)

HOLDOUT_UNIVERSES = ("entries", "edges")
TIE_RULES = ("zero", "half")


@dataclass(frozen=True)
class HoldoutSplit:
    train: AdjacencyMatrix
    index_set: np.ndarray
    seed: int | None = None

    @property
    def rows(self):
        return self.index_set[:, 0]

    @property
    def cols(self):
        return self.index_set[:, 1]


def holdout_split(A, fraction, seed, universe="entries"):
    """Zero out a random ``fraction`` of the candidate entries of ``A``.

    Exactly ``round(fraction * #candidates)`` entries are drawn uniformly
    without replacement (halves round up).
    """
    A = as_adjacency(A)
    if not 0 <= fraction < 1:
        raise InputError(f"hold-out fraction must be in [0, 1), got {fraction}")
    if universe not in HOLDOUT_UNIVERSES:
        raise InputError(f"hold-out universe must be one of {HOLDOUT_UNIVERSES}, got {universe!r}")
    candidates = A.mask if universe == "entries" else A.mask & (A.values > 0)
    flat = np.flatnonzero(candidates)
    k = math.floor(fraction * flat.size + 0.5)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(flat, size=k, replace=False))
    index_set = np.column_stack(np.unravel_index(chosen, A.values.shape)).astype(np.intp)
    values = np.array(A.values)
    values.flat[chosen] = 0.0
    return HoldoutSplit(AdjacencyMatrix(values, A.mask), index_set.reshape(-1, 2), seed)


def _gather(M, index_set):
    M = M.values if isinstance(M, AdjacencyMatrix) else np.asarray(M, dtype=float)
    if index_set is None:
        return M.ravel()
    index_set = np.asarray(index_set, dtype=np.intp).reshape(-1, 2)
    return M[index_set[:, 0], index_set[:, 1]]


def predictive_auc(A_eval, P_hat, index_set=None, ties="zero"):
    """Fraction of (zero, positive) pairs in the index set ranked correctly by ``P_hat``.

    A pair counts when the zero entry gets a strictly smaller score than the
    positive entry. Tied scores count 0 (``ties="zero"``, the literal
    definition) or 1/2 (``ties="half"``, the usual ROC convention).
    ``index_set=None`` scores every entry.

    Computed from sorted scores in ``O(k log k)``; the counts are integers so
    the result equals the pairwise double loop exactly.

    Examples
    --------
    >>> import numpy as np
    >>> predictive_auc(np.array([[0, 1, 0, 1]]), np.array([[0.1, 0.2, 0.3, 0.4]]))
    0.75
    """
    if ties not in TIE_RULES:
        raise InputError(f"ties must be one of {TIE_RULES}, got {ties!r}")
    a = _gather(A_eval, index_set)
    p = _gather(P_hat, index_set)
    neg = np.sort(p[a == 0])
    pos = p[a > 0]
    if neg.size == 0 or pos.size == 0:
        raise AUCUndefinedError("AUC undefined: index set needs at least one zero and one positive entry")
    below = np.searchsorted(neg, pos, side="left")
    if ties == "zero":
        return int(below.sum()) / (neg.size * pos.size)
    tied = np.searchsorted(neg, pos, side="right") - below
    return int(2 * below.sum() + tied.sum()) / (2 * neg.size * pos.size)


def rmse(P_hat, P_true):
    """Relative error ``||P_hat - P||_F / ||P||_F``."""
    P_hat = np.asarray(P_hat, dtype=float)
    P_true = np.asarray(P_true, dtype=float)
    if P_hat.shape != P_true.shape:
        raise InputError(f"shape mismatch: {P_hat.shape} vs {P_true.shape}")
    denom = np.linalg.norm(P_true)
    if denom == 0:
        raise InputError("relative error undefined for a zero reference matrix")
    return float(np.linalg.norm(P_hat - P_true) / denom)


@dataclass(frozen=True)
class TuningGrid:
    """Candidate rank caps ``ranks`` (``None`` = uncapped) and budgets ``budgets``."""

    ranks: tuple
    budgets: tuple
    validation_fraction: float = 0.2
    replicates: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(self.ranks))
        object.__setattr__(self, "budgets", tuple(float(R) for R in self.budgets))
        if not self.ranks or not self.budgets:
            raise InputError("tuning grid needs at least one rank and one budget")
        if not 0 < self.validation_fraction < 1:
            raise InputError(f"validation fraction must be in (0, 1), got {self.validation_fraction}")
        if int(self.replicates) < 1:
            raise InputError("replicates must be >= 1")

    def cells(self):
        return [(s, R) for s in self.ranks for R in self.budgets]


@dataclass(frozen=True)
class GridCell:
    s: int | None
    R: float
    replicate: int
    auc: float
    iterations: int
    converged: bool


@dataclass
class GridSearchResult:
    best: tuple
    cells: list
    final: object = field(repr=False)

    @property
    def table(self):
        """Mean validation AUC per ``(s, R)`` cell, in grid order."""
        out = {}
        for cell in self.cells:
            out.setdefault((cell.s, cell.R), []).append(cell.auc)
        return {key: float(np.nanmean(v)) if not np.all(np.isnan(v)) else float("nan") for key, v in out.items()}

    def rows(self):
        return [
            {"s": c.s, "R": c.R, "replicate": c.replicate, "auc": c.auc,
             "iterations": c.iterations, "converged": c.converged}
            for c in self.cells
        ]


def _rank_key(s):
    return math.inf if s is None else s


def grid_search(A, X, family, grid, base_config=None, seed=0, universe="entries", ties="zero", workers=1):
    """Pick ``(s, R)`` by subsampling validation and refit on the full network.

    For every replicate one hold-out split is drawn (shared by all cells);
    each cell is fit on the training matrix and scored by predictive AUC on
    the held-out entries of the original ``A``. The best cell maximises the
    mean AUC, ties going to the smaller ``s`` and then the smaller ``R``.
    """
    A = as_adjacency(A)
    if base_config is None:
        base_config = FitConfig(R=0.0)
    seeds = np.random.SeedSequence(seed).spawn(int(grid.replicates))
    splits = [
        holdout_split(A, grid.validation_fraction, int(sq.generate_state(1, np.uint64)[0]), universe)
        for sq in seeds
    ]
    jobs = [(s, R, rep) for (s, R) in grid.cells() for rep in range(len(splits))]

    def run(job):
        s, R, rep = job
        split = splits[rep]
        result = fit(split.train, X, family, base_config.replace(R=R, s=s))
        try:
            auc = predictive_auc(A, result.mean, split.index_set, ties=ties)
        except AUCUndefinedError:
            auc = float("nan")
        return GridCell(s, R, rep, auc, result.iterations, result.converged)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(run, jobs))
    else:
        cells = [run(job) for job in jobs]

    partial = GridSearchResult(best=None, cells=cells, final=None)
    table = partial.table
    scored = [(key, auc) for key, auc in table.items() if not math.isnan(auc)]
    if not scored:
        raise AUCUndefinedError("AUC undefined in every grid cell")
    best_auc = max(auc for _, auc in scored)
    best = min((key for key, auc in scored if auc == best_auc), key=lambda k: (_rank_key(k[0]), k[1]))
    logger.info("grid search best cell s=%s R=%s mean AUC=%.4f", best[0], best[1], best_auc)
    final = fit(A, X, family, base_config.replace(R=best[1], s=best[0]))
    return GridSearchResult(best=best, cells=cells, final=final)
