"""Reading networks and covariates, converting node attributes, persisting fits.

Edge lists are ``i<sep>j[<sep>weight]`` with ``sep`` a tab or comma and
0-based integer node ids (or string ids resolved through a label map).
Lines starting with ``#`` and blank lines are ignored.
"""

import json
import os
import re
import tempfile

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .families import get_family
from .glm import AdjacencyMatrix, ModelParams
from .spectral import _numerical_rank, svd

_SPLIT = re.compile(r"\s*[\t,]\s*")
ATTR_METHODS = ("cocount-maxnorm", "inner-product")


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line


def load_label_map(path):
    """Read ``label<sep>id`` lines into a dict."""
    labels = {}
    for lineno, line in _lines(path):
        fields = _SPLIT.split(line)
        if len(fields) != 2:
            raise InputError(f"expected 'label<sep>id', got {line!r}", line=lineno)
        try:
            labels[fields[0]] = int(fields[1])
        except ValueError:
            raise InputError(f"node id {fields[1]!r} is not an integer", line=lineno) from None
    return labels


def _node_id(token, n, lineno, labels):
    if labels is not None and token in labels:
        idx = labels[token]
    else:
        try:
            idx = int(token)
        except ValueError:
            raise InputError(f"node id {token!r} is neither an integer nor a known label", line=lineno) from None
    if not 0 <= idx < n:
        raise InputError(f"node id {idx} out of range for n={n}", line=lineno)
    return idx


def load_edge_list(path, n, symmetric=False, family=None, labels=None, mask_diagonal=False):
    """Dense n x n adjacency matrix from an edge list.

    Repeated ``(i, j)`` rows are summed. With ``symmetric=True`` every entry
    is mirrored; an edge listed in both orientations must carry the same
    weight, otherwise an :class:`InputError` is raised.
    """
    family = get_family(family) if family is not None else None
    directed = {}
    last_line = {}
    for lineno, line in _lines(path):
        fields = _SPLIT.split(line)
        if len(fields) not in (2, 3):
            raise InputError(f"expected 'i<sep>j[<sep>weight]', got {line!r}", line=lineno)
        i = _node_id(fields[0], n, lineno, labels)
        j = _node_id(fields[1], n, lineno, labels)
        try:
            w = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError:
            raise InputError(f"weight {fields[2]!r} is not a number", line=lineno) from None
        if not np.isfinite(w):
            raise InputError("weight is not finite", line=lineno)
        if w < 0 and family is not None:
            raise InputError(f"negative weight {w} not allowed for the {family.name} family", line=lineno)
        directed[i, j] = directed.get((i, j), 0.0) + w
        last_line[i, j] = lineno

    A = np.zeros((n, n))
    for (i, j), w in directed.items():
        if symmetric and (j, i) in directed and directed[j, i] != w:
            raise InputError(
                f"conflicting weights for undirected edge ({i}, {j}): {w} vs {directed[j, i]}",
                line=max(last_line[i, j], last_line[j, i]),
            )
        A[i, j] = w
        if symmetric:
            A[j, i] = w
    if mask_diagonal:
        return AdjacencyMatrix.without_diagonal(A)
    return AdjacencyMatrix(A)


def save_edge_list(path, A, sep="\t"):
    """Write the non-zero entries of ``A`` as ``i<sep>j<sep>weight`` rows."""
    values = A.values if isinstance(A, AdjacencyMatrix) else np.asarray(A)
    rows, cols = np.nonzero(values)
    lines = [f"{i}{sep}{j}{sep}{values[i, j]:.17g}\n" for i, j in zip(rows, cols)]
    atomic_write(path, "".join(lines))


def load_matrix(path, n=None):
    """Dense comma-separated matrix (``#`` comments allowed)."""
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if n is not None and M.shape != (n, n):
        raise InputError(f"{path}: expected a {n}x{n} matrix, got shape {M.shape}")
    return M


def convert_node_attrs(path, n, method="cocount-maxnorm", labels=None):
    """Turn node attributes into an n x n edge covariate.

    ``cocount-maxnorm`` reads ``node<sep>item`` pairs and returns the number
    of items shared by each pair of nodes divided by the largest such count
    over ``i != j``; the diagonal is zero. ``inner-product`` reads
    ``node<sep>v1,...,vd`` rows and returns ``X_ij = <v_i, v_j>``.
    """
    if method not in ATTR_METHODS:
        raise InputError(f"unknown attribute method {method!r}; expected one of {ATTR_METHODS}")
    if method == "cocount-maxnorm":
        return _cocount_maxnorm(path, n, labels)
    return _inner_product(path, n, labels)


def _cocount_maxnorm(path, n, labels):
    items = {}
    pairs = set()
    for lineno, line in _lines(path):
        fields = _SPLIT.split(line)
        if len(fields) != 2:
            raise InputError(f"expected 'node<sep>item', got {line!r}", line=lineno)
        node = _node_id(fields[0], n, lineno, labels)
        item = items.setdefault(fields[1], len(items))
        pairs.add((node, item))
    if not pairs:
        raise InputError(f"{path}: no node attributes found")
    rows, cols = zip(*sorted(pairs))
    return cocount_maxnorm(rows, cols, n, len(items), source=path)


def cocount_maxnorm(nodes, items, n, n_items=None, source="attributes"):
    """Max-normalised count of shared items for every node pair, zero diagonal.

    ``nodes[k]`` owns ``items[k]``; repeated (node, item) pairs count once.
    """
    nodes = np.asarray(nodes, dtype=np.intp)
    items = np.asarray(items, dtype=np.intp)
    n_items = int(items.max()) + 1 if n_items is None else n_items
    B = sp.csr_matrix((np.ones(nodes.size), (nodes, items)), shape=(n, n_items))
    # construction sums duplicates; membership is binary
    B.data[:] = 1.0
    C = (B @ B.T).toarray()
    np.fill_diagonal(C, 0.0)
    top = C.max()
    if top == 0:
        raise InputError(f"{source}: no pair of nodes shares an item, cannot normalise co-counts")
    return C / top


def _inner_product(path, n, labels):
    vectors = {}
    dim = None
    for lineno, line in _lines(path):
        head, sep, rest = re.split(r"([\t,])", line, maxsplit=1) if re.search(r"[\t,]", line) else (line, "", "")
        if not sep:
            raise InputError(f"expected 'node<sep>v1,...,vd', got {line!r}", line=lineno)
        node = _node_id(head.strip(), n, lineno, labels)
        try:
            vec = np.array([float(v) for v in _SPLIT.split(rest.strip())])
        except ValueError:
            raise InputError(f"non-numeric attribute vector {rest!r}", line=lineno) from None
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise InputError(f"attribute vector has length {vec.size}, expected {dim}", line=lineno)
        vectors[node] = vec
    if dim is None:
        raise InputError(f"{path}: no node attributes found")
    V = np.zeros((n, dim))
    for node, vec in vectors.items():
        V[node] = vec
    return V @ V.T


def atomic_write(path, text):
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_matrix(M, header=None):
    lines = [f"# {header}\n"] if header else []
    M = np.atleast_2d(M)
    for row in M:
        lines.append(",".join(f"{v:.17g}" for v in row) + "\n")
    return "".join(lines)


def save_matrix(path, M, header=None):
    atomic_write(path, _format_matrix(M, header))


def save_json(path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def save_rows(path, rows, columns):
    """CSV with a header row; floats use the shortest text that round-trips exactly."""
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    lines = [",".join(columns) + "\n"]
    for row in rows:
        lines.append(",".join(fmt(row[c]) for c in columns) + "\n")
    atomic_write(path, "".join(lines))


def save_params(directory, params, prefix="params"):
    """Persist ``beta`` and the non-zero singular triplets of ``theta``.

    Files: ``<prefix>_beta.csv``, ``<prefix>_theta_U.csv`` (n x k),
    ``<prefix>_theta_V.csv`` (n x k), ``<prefix>_theta_sigma.csv`` (k).
    """
    f = svd(params.theta)
    k = _numerical_rank(f.sigma, params.theta.shape)
    n = params.n
    save_matrix(os.path.join(directory, f"{prefix}_beta.csv"), params.beta.reshape(-1, 1), f"m={params.m}")
    save_matrix(os.path.join(directory, f"{prefix}_theta_U.csv"), f.U[:, :k], f"shape={n},{k}")
    save_matrix(os.path.join(directory, f"{prefix}_theta_V.csv"), f.V[:, :k], f"shape={n},{k}")
    save_matrix(os.path.join(directory, f"{prefix}_theta_sigma.csv"), f.sigma[:k].reshape(-1, 1), f"k={k}")


def _read_header(path):
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    m = re.match(r"#\s*(\w+)=([\d,]+)", first)
    if not m:
        raise InputError(f"{path}: missing shape header")
    return [int(v) for v in m.group(2).split(",")]


def _load_column(path, length):
    if length == 0:
        return np.zeros(0)
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)[:, 0]


def load_params(directory, prefix="params"):
    """Inverse of :func:`save_params`."""
    def p(name):
        return os.path.join(directory, f"{prefix}_{name}.csv")

    (m,) = _read_header(p("beta"))
    n, k = _read_header(p("theta_U"))
    beta = _load_column(p("beta"), m)
    sigma = _load_column(p("theta_sigma"), k)
    if k:
        U = np.loadtxt(p("theta_U"), delimiter=",", comments="#", ndmin=2)
        V = np.loadtxt(p("theta_V"), delimiter=",", comments="#", ndmin=2)
        theta = (U * sigma) @ V.T
    else:
        theta = np.zeros((n, n))
    return ModelParams(theta, beta)
