"""Loaders for the two public networks used in the real-data experiments.

Neither dataset ships with the package. Point the loaders at local copies:

* C. elegans neural network: Newman's ``celegansneural.gml`` (directed,
  integer ``value`` weights, 1-based ids) or a 0-based ``i<TAB>j<TAB>w``
  edge list.
* Last.fm (HetRec 2011): the directory holding ``user_friends.dat``,
  ``user_artists.dat`` and ``user_taggedartists.dat``.
"""

import os
import re

import numpy as np

from .errors import InputError
from .glm import AdjacencyMatrix, CovariateTensor
from .io import cocount_maxnorm, load_edge_list

CELEGANS_N = 297
LASTFM_N = 1892

_GML_NODE = re.compile(r"node\s*\[\s*id\s+(\d+)")
_GML_EDGE = re.compile(r"edge\s*\[\s*source\s+(\d+)\s+target\s+(\d+)(?:\s+value\s+([\d.eE+-]+))?")


def _parse_gml(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    ids = sorted({int(i) for i in _GML_NODE.findall(text)})
    if not ids:
        raise InputError(f"{path}: no nodes found")
    index = {node: k for k, node in enumerate(ids)}
    A = np.zeros((len(ids), len(ids)))
    for src, dst, value in _GML_EDGE.findall(text):
        A[index[int(src)], index[int(dst)]] += float(value) if value else 1.0
    return A


def load_celegans(path):
    """Directed weighted C. elegans network as an :class:`AdjacencyMatrix`."""
    if not os.path.exists(path):
        raise InputError(f"C. elegans data not found: {path}")
    if path.endswith(".gml"):
        A = _parse_gml(path)
    else:
        A = load_edge_list(path, CELEGANS_N, family="poisson").values
    if A.shape != (CELEGANS_N, CELEGANS_N):
        raise InputError(f"{path}: expected {CELEGANS_N} nodes, found {A.shape[0]}")
    return AdjacencyMatrix(A)


def _table(path, columns):
    if not os.path.exists(path):
        raise InputError(f"Last.fm file not found: {path}")
    data = np.loadtxt(path, delimiter="\t", skiprows=1, usecols=columns, dtype=np.int64, ndmin=2)
    return data


def load_lastfm(directory):
    """Friendship network plus the listened and tagged co-count covariates.

    Users are indexed 0..n-1 in increasing order of their HetRec ids. The
    friendship file lists each friendship in both directions, so the
    returned binary adjacency matrix is symmetric.

    Returns
    -------
    A : AdjacencyMatrix
    X : CovariateTensor
        ``(X_listen, X_tag)``, each the number of artists shared by two users
        divided by its maximum over pairs.
    """
    friends = _table(os.path.join(directory, "user_friends.dat"), (0, 1))
    listened = _table(os.path.join(directory, "user_artists.dat"), (0, 1))
    tagged = _table(os.path.join(directory, "user_taggedartists.dat"), (0, 1))

    users = np.unique(np.concatenate([friends.ravel(), listened[:, 0], tagged[:, 0]]))
    n = users.size
    index = {int(u): k for k, u in enumerate(users)}

    def remap(col):
        return np.array([index[int(u)] for u in col], dtype=np.intp)

    A = np.zeros((n, n))
    A[remap(friends[:, 0]), remap(friends[:, 1])] = 1.0
    A = np.maximum(A, A.T)
    _, artists_l = np.unique(listened[:, 1], return_inverse=True)
    _, artists_t = np.unique(tagged[:, 1], return_inverse=True)
    X_listen = cocount_maxnorm(remap(listened[:, 0]), artists_l, n, source="user_artists.dat")
    X_tag = cocount_maxnorm(remap(tagged[:, 0]), artists_t, n, source="user_taggedartists.dat")
    return AdjacencyMatrix(A), CovariateTensor([X_listen, X_tag])
