"""Eigenvector-iteration ranking and similarity scores.

Covers random-walk ranking with teleportation, neighbourhood-averaging
similarity flow over product graphs, the two mutual-reinforcement schemes
(plain and stochastically normalised), and the coupled even-iterate
similarity recursion, plus greedy extraction of node-disjoint alignments
from product-space score vectors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BreakdownError, NumericalError, ValidationError
from .graphs import KroneckerOperator, StochasticMatrix, adjacency, isorank_operator, normalize

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
    "RankVector",
    "IterationReport",
    "AlignmentPair",
    "power_iteration",
    "pagerank",
    "prior_vector",
    "isorank",
    "isorank_series",
    "molecular_similarity",
    "hits",
    "stochastic_hits",
    "blondel_similarity",
    "blondel_similarity_vector",
    "extract_alignment",
    "alignment_csv",
]


@dataclass(frozen=True)
class RankVector:
    """Score vector normalised under the stated convention ("l1" or "l2").

    Entries of principal eigenvectors of nonnegative irreducible operators
    are nonnegative; the container itself only enforces the norm.
    """

    values: np.ndarray
    norm_convention: str

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("rank vector must be one-dimensional and nonempty")
        if self.norm_convention not in ("l1", "l2"):
            raise ValidationError(f"unknown norm convention {self.norm_convention!r}")
        norm = _norm(v, self.norm_convention)
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError(f"{self.norm_convention} norm is {norm!r}, expected 1")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class IterationReport:
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class AlignmentPair:
    """One aligned node tuple (one node per network) with its score."""

    nodes: tuple[int, ...]
    score: float


def _norm(v, convention):
    return float(np.abs(v).sum()) if convention == "l1" else float(np.linalg.norm(v))


def _as_operator(apply):
    if isinstance(apply, KroneckerOperator):
        return apply.apply
    if callable(apply):
        return apply
    mat = np.asarray(apply, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError("operator matrix must be square")
    return lambda x: mat @ x


def power_iteration(apply, x0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, norm="l1"):
    """Iterate ``x <- apply(x) / ||apply(x)||`` until the change drops to tol.

    ``apply`` may be a callable, a square array, or a
    :class:`KroneckerOperator`.  The residual reported is the l1 change
    between successive normalised iterates.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if max_iter < 1:
        raise ValidationError("max_iter must be at least 1")
    if norm not in ("l1", "l2"):
        raise ValidationError(f"unknown norm convention {norm!r}")
    op = _as_operator(apply)
    x = np.asarray(x0, dtype=float).copy()
    if x.ndim != 1:
        raise ValidationError("x0 must be a vector")
    n0 = _norm(x, norm)
    if n0 == 0.0:
        raise ValidationError("x0 must be nonzero")
    x /= n0

    residual = math.inf
    for iteration in range(1, max_iter + 1):
        y = np.asarray(op(x), dtype=float)
        if y.shape != x.shape or not np.all(np.isfinite(y)):
            raise NumericalError("operator produced a non-finite or misshapen iterate")
        ny = _norm(y, norm)
        if ny <= 1e-300:
            raise BreakdownError("operator annihilated the iterate")
        y /= ny
        residual = float(np.abs(y - x).sum())
        x = y
        if residual <= tol:
            return RankVector(x, norm), IterationReport(iteration, residual, True)
    return RankVector(x, norm), IterationReport(max_iter, residual, False)


def pagerank(p_tilde, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Stationary distribution of a row-stochastic walk matrix.

    Expects the teleportation-smoothed matrix (see
    :func:`netqalign.graphs.google_matrix`); iterates ``r <- P^T r`` in l1.
    """
    if not isinstance(p_tilde, StochasticMatrix) or p_tilde.convention not in ("row", "doubly"):
        raise ValidationError("pagerank expects a row-stochastic matrix")
    m = p_tilde.matrix
    if np.any(m <= 0.0):
        warnings.warn(
            "walk matrix is not strictly positive; the stationary vector may not be unique",
            stacklevel=2,
        )
    x0 = np.full(p_tilde.dim, 1.0 / p_tilde.dim)
    vec, report = power_iteration(lambda x: m.T @ x, x0, tol=tol, max_iter=max_iter)
    if not report.converged:
        warnings.warn(f"pagerank did not converge within {max_iter} iterations", stacklevel=2)
    return vec


def prior_vector(h, dim):
    """Flatten, validate, and l1-normalise an a-priori similarity vector.

    Matrix-shaped priors are ravelled in C order, matching the fixed
    product-space indexing.
    """
    v = np.asarray(h, dtype=float).ravel(order="C")
    if v.size != dim:
        raise ValidationError(f"prior has {v.size} entries, expected {dim}")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ValidationError("prior entries must be finite and nonnegative")
    total = v.sum()
    if total <= 0:
        raise ValidationError("prior must have positive total mass")
    return v / total


def isorank(graph_list, alpha, h=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
            isolated="error"):
    """Fixed point of ``R <- alpha * W R + (1 - alpha) * h`` in l1.

    ``W`` is the column-stochastic neighbourhood-averaging operator over the
    product of the given undirected graphs.  With ``alpha == 1`` the prior is
    optional and the iteration reduces to the pure similarity flow; the
    start vector is ``h`` when given, else uniform.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    op = isorank_operator(graph_list, isolated=isolated)
    dim = op.total_dim
    if h is None:
        if alpha < 1.0:
            raise ValidationError("prior h is required when alpha < 1")
        x0 = np.full(dim, 1.0 / dim)
        step = op.apply
    else:
        hv = prior_vector(h, dim)
        x0 = hv

        def step(x, _hv=hv):
            return alpha * op.apply(x) + (1.0 - alpha) * _hv

    return power_iteration(step, x0, tol=tol, max_iter=max_iter)


def isorank_series(graph_list, alpha, h, terms, isolated="error"):
    """Truncated geometric series ``(1 - alpha) * sum_k alpha^k W^k h``.

    Independent closed-form route to the same fixed point as
    :func:`isorank`; the truncation error decays like ``alpha^terms``.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValidationError("series form requires alpha in [0, 1)")
    if terms < 0:
        raise ValidationError("terms must be nonnegative")
    op = isorank_operator(graph_list, isolated=isolated)
    hv = prior_vector(h, op.total_dim)
    term = hv.copy()
    acc = hv.copy()
    for _ in range(terms):
        term = alpha * op.apply(term)
        acc += term
    acc *= 1.0 - alpha
    total = acc.sum()
    if total <= 0:
        raise BreakdownError("series sum vanished")
    return RankVector(acc / total, "l1")


def molecular_similarity(g1, g2, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Principal direction of the raw adjacency product ``A_1 (x) A_2``.

    Power iteration with l2 normalisation from the uniform start; scores
    couple vertex pairs whose neighbourhoods reinforce each other.
    """
    op = KroneckerOperator((adjacency(g1), adjacency(g2)))
    dim = op.total_dim
    x0 = np.full(dim, 1.0 / math.sqrt(dim))
    vec, report = power_iteration(op.apply, x0, tol=tol, max_iter=max_iter, norm="l2")
    if not report.converged:
        warnings.warn(
            f"similarity iteration did not converge within {max_iter} iterations",
            stacklevel=2,
        )
    return vec


def _square_nonnegative(a, what):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{what} expects a square matrix")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValidationError(f"{what} expects finite nonnegative entries")
    return a


def hits(a, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Mutual-reinforcement scores: authority and hub vectors.

    Alternates ``a <- A^T h`` and ``h <- A a`` with l2 normalisation, which
    converges to the principal eigenvectors of ``A^T A`` and ``A A^T``.
    """
    a = _square_nonnegative(a, "hits")
    if not np.any(a):
        raise BreakdownError("adjacency is identically zero")
    n = a.shape[0]
    hub = np.full(n, 1.0 / math.sqrt(n))
    auth = np.full(n, 1.0 / math.sqrt(n))
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        new_auth = a.T @ hub
        na = np.linalg.norm(new_auth)
        if na <= 1e-300:
            raise BreakdownError("authority iterate vanished")
        new_auth /= na
        new_hub = a @ new_auth
        nh = np.linalg.norm(new_hub)
        if nh <= 1e-300:
            raise BreakdownError("hub iterate vanished")
        new_hub /= nh
        residual = float(np.abs(new_auth - auth).sum() + np.abs(new_hub - hub).sum())
        auth, hub = new_auth, new_hub
        if residual <= tol:
            break
    else:
        warnings.warn(f"hits did not converge within {max_iter} iterations", stacklevel=2)
    return RankVector(auth, "l2"), RankVector(hub, "l2")


def stochastic_hits(a, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, dangling="error"):
    """Stochastically normalised mutual reinforcement.

    With ``W_r`` the row-normalised and ``W_c`` the column-normalised
    adjacency, the authority vector solves ``x = W_c^T W_r x`` and the hub
    vector ``x = W_r^T W_c x``; both products are stochastic, so the
    relevant eigenvalue is exactly 1 and the outputs are l1-normalised.
    Zero rows/columns follow the ``dangling`` policy of
    :func:`netqalign.graphs.normalize`.
    """
    a = _square_nonnegative(a, "stochastic_hits")
    wr = normalize(a, "row", dangling=dangling).matrix
    wc = normalize(a, "column", dangling=dangling).matrix
    n = a.shape[0]
    x0 = np.full(n, 1.0 / n)
    auth, rep_a = power_iteration(wc.T @ wr, x0, tol=tol, max_iter=max_iter)
    hub, rep_h = power_iteration(wr.T @ wc, x0, tol=tol, max_iter=max_iter)
    if not (rep_a.converged and rep_h.converged):
        warnings.warn(
            f"stochastic_hits did not converge within {max_iter} iterations",
            stacklevel=2,
        )
    return auth, hub


def blondel_similarity(g1, g2, iterations):
    """Coupled similarity recursion, matrix form.

    Runs ``X <- A_1 X A_2^T + A_1^T X A_2`` from the all-ones matrix with
    Frobenius normalisation each step and returns the (even) final iterate,
    shaped ``|V_1| x |V_2|`` so entry ``(i, j)`` scores pairing node ``i``
    of the first graph with node ``j`` of the second.  Even iterates are
    required because the recursion alternates between two accumulation
    parities.
    """
    if iterations < 0 or iterations % 2 != 0:
        raise ValidationError("iteration count must be even and nonnegative")
    a1, a2 = adjacency(g1), adjacency(g2)
    x = np.ones((g1.node_count, g2.node_count))
    x /= np.linalg.norm(x)
    for _ in range(iterations):
        x = a1 @ x @ a2.T + a1.T @ x @ a2
        nf = np.linalg.norm(x)
        if nf <= 1e-300:
            raise BreakdownError("similarity iterate vanished")
        x /= nf
    return x


def blondel_similarity_vector(g1, g2, iterations):
    """Vector-form twin of :func:`blondel_similarity`.

    Iterates ``x <- (A_1 (x) A_2 + A_1^T (x) A_2^T) x`` on the flattened
    score vector; must agree with the matrix form entrywise.
    """
    if iterations < 0 or iterations % 2 != 0:
        raise ValidationError("iteration count must be even and nonnegative")
    fwd = KroneckerOperator((adjacency(g1), adjacency(g2)))
    bwd = KroneckerOperator((adjacency(g1).T, adjacency(g2).T))
    dim = fwd.total_dim
    x = np.ones(dim) / math.sqrt(dim)
    for _ in range(iterations):
        x = fwd.apply(x) + bwd.apply(x)
        nf = np.linalg.norm(x)
        if nf <= 1e-300:
            raise BreakdownError("similarity iterate vanished")
        x /= nf
    return x.reshape(g1.node_count, g2.node_count)


def extract_alignment(scores, dims, strategy="greedy", top=None):
    """Greedy node-disjoint alignment from a product-space score vector.

    Scores are read in the fixed product indexing (C order over ``dims``).
    Repeatedly emits the highest-scoring tuple whose nodes are all unused in
    their respective networks, breaking ties by lowest product index, until
    ``top`` pairs (default: exhaustion) are produced.
    """
    if strategy != "greedy":
        raise ValidationError(f"unknown extraction strategy {strategy!r}")
    values = scores.values if isinstance(scores, RankVector) else np.asarray(scores, dtype=float).ravel()
    dims = tuple(int(d) for d in dims)
    if any(d <= 0 for d in dims):
        raise ValidationError("all network sizes must be positive")
    if values.size != math.prod(dims):
        raise ValidationError(
            f"score vector has {values.size} entries, expected {math.prod(dims)}"
        )
    if top is not None and top < 1:
        raise ValidationError("top must be positive when given")

    limit = min(dims) if top is None else min(top, min(dims))
    order = np.lexsort((np.arange(values.size), -values))
    used = [np.zeros(d, dtype=bool) for d in dims]
    out = []
    for flat in order:
        tup = np.unravel_index(int(flat), dims)
        if any(used[g][node] for g, node in enumerate(tup)):
            continue
        for g, node in enumerate(tup):
            used[g][node] = True
        out.append(AlignmentPair(tuple(int(t) for t in tup), float(values[flat])))
        if len(out) == limit:
            break
    return out


def alignment_csv(pairs, k):
    """Render alignment pairs as CSV: rank,score,node_g1,...,node_gk."""
    header = "rank,score," + ",".join(f"node_g{j + 1}" for j in range(k))
    lines = [header]
    for rank, pair in enumerate(pairs, start=1):
        if len(pair.nodes) != k:
            raise ValidationError("alignment tuple length does not match network count")
        lines.append(f"{rank},{pair.score!r}," + ",".join(str(n) for n in pair.nodes))
    return "\n".join(lines) + "\n"
