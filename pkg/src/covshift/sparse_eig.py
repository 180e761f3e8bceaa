"""Exact largest absolute s-sparse eigenvalue by exhaustive support
enumeration.

Feasible for moderate ``p`` and ``s`` only; the number of supports
``comb(p, s)`` is checked against a budget before any work is done, and the
SDP relaxation is suggested when the budget is exceeded.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import _check_count, sym_matrix
from .exceptions import EnumerationBudgetError, InvalidInputError

__all__ = ["SparseEigResult", "sparse_abs_eigmax", "operator_norm", "DEFAULT_BUDGET"]

DEFAULT_BUDGET = 2_000_000

_CHUNK = 4096


@dataclass(frozen=True)
class SparseEigResult:
    """Largest absolute s-sparse eigenvalue with its certifying direction.

    ``vector`` is a unit vector supported on ``support`` whose quadratic
    form reproduces ``value`` in absolute value; its first nonzero entry is
    positive.
    """

    value: float
    support: tuple[int, ...]
    vector: np.ndarray


def _support_chunks(p, s):
    it = itertools.combinations(range(p), s)
    while True:
        chunk = list(itertools.islice(it, _CHUNK))
        if not chunk:
            return
        yield np.asarray(chunk, dtype=np.intp)


def sparse_abs_eigmax(A, s, budget: int = DEFAULT_BUDGET) -> SparseEigResult:
    """Maximize ``|v' A v|`` over unit vectors with at most ``s`` nonzeros.

    Enumerates every size-``s`` support in lexicographic order and takes the
    largest absolute eigenvalue of the corresponding principal submatrix;
    ties in value resolve to the lexicographically smallest support. With
    ``s = p`` this is the operator norm.

    Raises
    ------
    EnumerationBudgetError
        If ``comb(p, s)`` exceeds ``budget``.
    """
    A = sym_matrix(A)
    p = A.shape[0]
    s = _check_count(s, "s", minimum=1)
    if s > p:
        raise InvalidInputError(f"s must be in [1, p]={p}, got {s}")
    n_supports = math.comb(p, s)
    if n_supports > budget:
        raise EnumerationBudgetError(
            f"{n_supports} supports exceed the enumeration budget ({budget}); "
            "use the SDP relaxation (covshift.sdp_relax.relaxed_sparse_eigmax) "
            "for this size"
        )

    if s == 1:
        d = np.abs(np.diag(A))
        k = int(np.argmax(d))
        vec = np.zeros(p)
        vec[k] = 1.0
        return SparseEigResult(value=float(d[k]), support=(k,), vector=vec)

    best_val = -1.0
    best_support = None
    for idx in _support_chunks(p, s):
        subs = A[idx[:, :, None], idx[:, None, :]]
        w = np.linalg.eigvalsh(subs)
        vals = np.maximum(np.abs(w[:, 0]), np.abs(w[:, -1]))
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_support = tuple(int(i) for i in idx[k])

    sub = A[np.ix_(best_support, best_support)]
    w, Q = np.linalg.eigh(sub)
    # Prefer the positive extreme on exact |min| == |max| ties.
    j = 0 if abs(w[0]) > abs(w[-1]) else len(w) - 1
    vec = np.zeros(p)
    vec[list(best_support)] = Q[:, j]
    nz = np.nonzero(vec)[0]
    if nz.size and vec[nz[0]] < 0:
        vec = -vec
    return SparseEigResult(value=best_val, support=best_support, vector=vec)


def operator_norm(A) -> float:
    """Largest absolute eigenvalue of a symmetric matrix.

    Equal to ``sparse_abs_eigmax(A, p).value`` but computed by a single
    full eigendecomposition.
    """
    A = sym_matrix(A)
    w = np.linalg.eigvalsh(A)
    return float(max(abs(w[0]), abs(w[-1])))
