"""Command-line interface.

Subcommands: ``fit``, ``grid-search``, ``simulate``, ``evaluate``,
``convert-attrs``. Every flag can also be set in a flat ``key = value``
config file passed with ``--config`` (keys use underscores, lists are
comma-separated); flags given on the command line override the file.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 AUC undefined.
Failures print a one-line JSON error record on stderr.
"""

import argparse
from dataclasses import asdict, dataclass, field, fields
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .errors import InputError, LowRankGLMError
from .evaluate import TuningGrid, grid_search, predictive_auc, rmse
from .families import get_family
from .fit import FitConfig, fit
from .glm import CovariateTensor, mean_matrix
from .io import (
    convert_node_attrs,
    load_edge_list,
    load_label_map,
    load_matrix,
    load_params,
    save_edge_list,
    save_json,
    save_matrix,
    save_params,
    save_rows,
)
from .simulate import GAUSSIAN_METHOD, RNG_NAME, SimDesign, generate_truth, sample_network

logger = logging.getLogger(__name__)

COMMANDS = ("fit", "grid-search", "simulate", "evaluate", "convert-attrs")


@dataclass
class RunConfig:
    command: str
    family: str = "bernoulli"
    edges: str | None = None
    n: int | None = None
    covariates: list = field(default_factory=list)
    attrs: str | None = None
    attr_method: str = "cocount-maxnorm"
    labels: str | None = None
    params: str | None = None
    truth: str | None = None
    out: str = "."
    output: str | None = None
    R: float | None = None
    s: int | None = None
    step: str | None = None
    gamma: float | None = None
    max_iter: int = 500
    tol: float = 1e-6
    ranks: list = field(default_factory=list)
    budgets: list = field(default_factory=list)
    fraction: float = 0.2
    replicates: int = 1
    workers: int = 1
    r: int = 2
    alpha: float = 0.0
    c: float = 0.0
    replications: int = 0
    n_test: int = 10
    seed: int = 0
    no_diagonal: bool = False
    symmetric: bool = False
    ties: str = "zero"
    holdout: str = "entries"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        get_family(self.family)
        if self.ties not in ("zero", "half"):
            raise InputError(f"ties must be 'zero' or 'half', got {self.ties!r}")
        if self.holdout not in ("entries", "edges"):
            raise InputError(f"holdout must be 'entries' or 'edges', got {self.holdout!r}")

    def require(self, *names):
        for name in names:
            value = getattr(self, name)
            if value is None or value == []:
                raise InputError(f"'{self.command}' needs --{name.replace('_', '-')}")
            if name in ("edges", "attrs", "params", "truth", "labels") and not os.path.exists(value):
                raise InputError(f"--{name} file not found: {value}")

    def fit_config(self):
        return FitConfig(
            R=float(self.R if self.R is not None else 0.0), s=self.s, step=self.step,
            gamma=self.gamma, max_iter=int(self.max_iter), tol=float(self.tol),
        )

    def manifest(self):
        """Config fields that determine results (output locations excluded)."""
        return {k: v for k, v in asdict(self).items() if k not in ("out", "output")}

    def digest(self):
        payload = json.dumps(self.manifest(), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()


_TYPES = {f.name: f for f in fields(RunConfig)}


def parse_value(text):
    """Typed value from config-file text: bool, none, int, float, list or string."""
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    if "," in text:
        return [parse_value(t) for t in text.split(",") if t.strip()]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text.strip("'\"")


def read_config_file(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}: expected 'key = value', got {raw.strip()!r}", line=lineno)
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in _TYPES or key == "command":
                raise InputError(f"{path}: unknown config key {key!r}", line=lineno)
            out[key] = parse_value(value)
    return out


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _coerce(cfg):
    cfg["covariates"] = [str(v) for v in _as_list(cfg.get("covariates"))]
    cfg["ranks"] = [None if v in (None, "none") else int(v) for v in _as_list(cfg.get("ranks"))]
    cfg["budgets"] = [float(v) for v in _as_list(cfg.get("budgets"))]
    for key in ("n", "s", "max_iter", "replicates", "workers", "r", "replications", "n_test", "seed"):
        if cfg.get(key) is not None:
            cfg[key] = int(cfg[key])
    for key in ("R", "gamma", "tol", "fraction", "alpha", "c"):
        if cfg.get(key) is not None:
            cfg[key] = float(cfg[key])
    return cfg


def _list_arg(text):
    return [parse_value(t) for t in text.split(",") if t.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="lowrank-glm", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file; flags override it")
    common.add_argument("--family", choices=["bernoulli", "poisson"])
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--edges", help="edge list i<sep>j[<sep>weight]")
    data.add_argument("--n", type=int, help="number of nodes")
    data.add_argument("--covariates", nargs="*", help="dense n x n CSV covariate matrices")
    data.add_argument("--labels", help="label<sep>id map for string node ids")
    data.add_argument("--symmetric", action="store_true", default=None)
    data.add_argument("--no-diagonal", action="store_true", default=None, help="exclude self-loops from the likelihood")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--R", type=float, help="nuclear-norm budget")
    solver.add_argument("--s", type=int, help="rank cap")
    solver.add_argument("--step", choices=["auto", "fixed", "backtracking"])
    solver.add_argument("--gamma", type=float)
    solver.add_argument("--max-iter", type=int)
    solver.add_argument("--tol", type=float)

    p = sub.add_parser("fit", parents=[common, data, solver], help="fit one (s, R) cell")

    p = sub.add_parser("grid-search", parents=[common, data, solver], help="tune (s, R) by subsampling validation")
    p.add_argument("--ranks", type=_list_arg, help="comma-separated rank caps")
    p.add_argument("--budgets", type=_list_arg, help="comma-separated nuclear-norm budgets")
    p.add_argument("--fraction", type=float, help="hold-out fraction")
    p.add_argument("--replicates", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--ties", choices=["zero", "half"])
    p.add_argument("--holdout", choices=["entries", "edges"])

    p = sub.add_parser("simulate", parents=[common, solver], help="generate a synthetic network")
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int, help="true rank")
    p.add_argument("--alpha", type=float)
    p.add_argument("--c", type=float, help="covariate strength, beta = (c, -c)")
    p.add_argument("--replications", type=int, help="also run this many study replications")
    p.add_argument("--n-test", type=int)
    p.add_argument("--ranks", type=_list_arg)
    p.add_argument("--budgets", type=_list_arg)

    p = sub.add_parser("evaluate", parents=[common, data], help="score saved parameters on a network")
    p.add_argument("--params", help="directory written by fit or grid-search")
    p.add_argument("--truth", help="true mean matrix CSV, for the relative error")
    p.add_argument("--ties", choices=["zero", "half"])

    p = sub.add_parser("convert-attrs", parents=[common], help="node attributes to an edge covariate")
    p.add_argument("--attrs", help="node attribute file")
    p.add_argument("--n", type=int)
    p.add_argument("--attr-method", choices=["cocount-maxnorm", "inner-product"])
    p.add_argument("--labels")
    p.add_argument("--output", help="output CSV path (default <out>/covariate.csv)")
    return parser


def resolve_config(argv=None):
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("config", "verbose") or value is None:
            continue
        values[key] = value
    values["command"] = args.command
    return RunConfig(**_coerce(values)), args.verbose


def _load_data(cfg):
    cfg.require("edges", "n")
    family = get_family(cfg.family)
    labels = load_label_map(cfg.labels) if cfg.labels else None
    A = load_edge_list(cfg.edges, cfg.n, symmetric=cfg.symmetric, family=family,
                       labels=labels, mask_diagonal=cfg.no_diagonal)
    X = CovariateTensor([load_matrix(path, cfg.n) for path in cfg.covariates]) if cfg.covariates \
        else CovariateTensor.empty(cfg.n)
    return A, X, family


def _meta(cfg, **extra):
    meta = {
        "version": __version__,
        "command": cfg.command,
        "seed": cfg.seed,
        "config_hash": cfg.digest(),
        "config": cfg.manifest(),
        "rng": RNG_NAME,
        "gaussian": GAUSSIAN_METHOD,
    }
    meta.update(extra)
    return meta


def _write_fit(out, result):
    save_params(out, result.params)
    save_rows(os.path.join(out, "trace.csv"),
              [{"iteration": i + 1, "objective": v} for i, v in enumerate(result.objective_trace)],
              ["iteration", "objective"])


def _fit_metrics(result):
    return [
        {"metric": "loglik", "value": result.objective},
        {"metric": "iterations", "value": result.iterations},
        {"metric": "converged", "value": int(result.converged)},
        {"metric": "clamp_events", "value": result.clamp_events},
        {"metric": "rank", "value": result.rank()},
        {"metric": "nuclear_norm", "value": result.nuclear_norm()},
    ]


def cmd_fit(cfg):
    cfg.require("R")
    A, X, family = _load_data(cfg)
    result = fit(A, X, family, cfg.fit_config())
    _write_fit(cfg.out, result)
    save_rows(os.path.join(cfg.out, "metrics.csv"), _fit_metrics(result), ["metric", "value"])
    save_json(os.path.join(cfg.out, "run_meta.json"), _meta(cfg))


def cmd_grid_search(cfg):
    cfg.require("ranks", "budgets")
    A, X, family = _load_data(cfg)
    grid = TuningGrid(cfg.ranks, cfg.budgets, cfg.fraction, cfg.replicates)
    search = grid_search(A, X, family, grid, cfg.fit_config(), seed=cfg.seed,
                         universe=cfg.holdout, ties=cfg.ties, workers=cfg.workers)
    save_rows(os.path.join(cfg.out, "grid.csv"), search.rows(),
              ["s", "R", "replicate", "auc", "iterations", "converged"])
    best_s, best_R = search.best
    metrics = [
        {"metric": "best_s", "value": best_s},
        {"metric": "best_R", "value": best_R},
        {"metric": "best_auc", "value": search.table[search.best]},
    ] + _fit_metrics(search.final)
    save_rows(os.path.join(cfg.out, "metrics.csv"), metrics, ["metric", "value"])
    _write_fit(cfg.out, search.final)
    save_json(os.path.join(cfg.out, "run_meta.json"), _meta(cfg, best={"s": best_s, "R": best_R}))


def cmd_simulate(cfg):
    cfg.require("n")
    design = SimDesign(n=cfg.n, r=cfg.r, alpha=cfg.alpha, c=cfg.c, family=cfg.family, seed=cfg.seed)
    params, X, P = generate_truth(design)
    net_seed = int(np.random.SeedSequence([cfg.seed, 0]).generate_state(1, np.uint64)[0])
    A = sample_network(P, cfg.family, net_seed)
    os.makedirs(cfg.out, exist_ok=True)
    save_edge_list(os.path.join(cfg.out, "network.tsv"), A)
    for k in range(X.m):
        save_matrix(os.path.join(cfg.out, f"X{k + 1}.csv"), X[k])
    save_matrix(os.path.join(cfg.out, "P.csv"), P)
    save_params(cfg.out, params, prefix="truth")
    extra = {"design": design.to_dict(), "network_seed": net_seed}

    if cfg.replications:
        from .experiment import default_grid, run_study

        grid = default_grid(cfg.n, cfg.alpha) if not (cfg.ranks and cfg.budgets) \
            else TuningGrid(cfg.ranks, cfg.budgets, cfg.fraction)
        results = run_study(cfg.n, cfg.r, cfg.alpha, cfg.c, cfg.family, cfg.replications,
                            seed=cfg.seed, grid=grid, n_test=cfg.n_test)
        rows = []
        for rep, res in enumerate(results):
            for metric, value in res.to_dict().items():
                if metric in ("seed", "n"):
                    continue
                rows.append({"alpha": cfg.alpha, "c": cfg.c, "n": cfg.n, "replicate": rep,
                             "metric": metric, "value": value})
        save_rows(os.path.join(cfg.out, "study.csv"), rows, ["alpha", "c", "n", "replicate", "metric", "value"])
    save_json(os.path.join(cfg.out, "run_meta.json"), _meta(cfg, **extra))


def cmd_evaluate(cfg):
    cfg.require("params")
    A, X, family = _load_data(cfg)
    params = load_params(cfg.params)
    P_hat = mean_matrix(params, X, family)
    index = np.argwhere(A.mask)
    metrics = [{"metric": "auc", "value": predictive_auc(A, P_hat, index, ties=cfg.ties)}]
    if cfg.truth:
        metrics.append({"metric": "rmse", "value": rmse(P_hat, load_matrix(cfg.truth, cfg.n))})
    save_rows(os.path.join(cfg.out, "metrics.csv"), metrics, ["metric", "value"])
    save_json(os.path.join(cfg.out, "run_meta.json"), _meta(cfg))


def cmd_convert_attrs(cfg):
    cfg.require("attrs", "n")
    labels = load_label_map(cfg.labels) if cfg.labels else None
    X = convert_node_attrs(cfg.attrs, cfg.n, cfg.attr_method, labels=labels)
    save_matrix(cfg.output or os.path.join(cfg.out, "covariate.csv"), X)


HANDLERS = {
    "fit": cmd_fit,
    "grid-search": cmd_grid_search,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
    "convert-attrs": cmd_convert_attrs,
}


def run(cfg):
    """Execute a resolved :class:`RunConfig`; returns the process exit code."""
    try:
        os.makedirs(cfg.out, exist_ok=True)
        HANDLERS[cfg.command](cfg)
    except (LowRankGLMError, OSError) as exc:
        code = getattr(exc, "exit_code", 2)
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        if getattr(exc, "line", None) is not None:
            record["line"] = exc.line
        print(json.dumps(record), file=sys.stderr)
        return code
    return 0


def main(argv=None):
    try:
        cfg, verbose = resolve_config(argv)
    except (LowRankGLMError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 2}), file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
