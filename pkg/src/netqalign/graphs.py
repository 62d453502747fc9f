"""Graph ingestion, stochastic normalisation, and Kronecker product operators.

Dense matrices are plain ``numpy.ndarray`` values throughout; the wrapper
types below only add the invariants a bare array cannot carry (validated
line sums, factorised product structure).

Product-space indexing is fixed once and used everywhere: for factor
dimensions ``(M_1, ..., M_k)`` the tuple ``(i_1, ..., i_k)`` maps to the
flat index with the *left* factor outermost, i.e. C-order ravelling.  For
two factors that is ``i_1 * M_2 + i_2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParseError, SizeError, ValidationError

#: Largest product dimension :func:`kronecker` will materialise explicitly.
KRONECKER_CAP = 4096

#: Default tolerance on unit line sums of stochastic matrices.
STOCHASTIC_TOL = 1e-10

__all__ = [
    "KRONECKER_CAP",
    "STOCHASTIC_TOL",
    "Graph",
    "StochasticMatrix",
    "KroneckerOperator",
    "load_edge_list",
    "adjacency",
    "degrees",
    "normalize",
    "google_matrix",
    "kronecker",
    "kron_apply",
    "isorank_operator",
    "parse_matrix",
    "format_matrix",
]


@dataclass(frozen=True)
class Graph:
    """Weighted graph on nodes ``0 .. node_count-1``.

    Undirected graphs store each edge once (canonically ``src <= dst``) and
    expose it symmetrically through :func:`adjacency`.  Self-loops are
    permitted and enter the adjacency diagonal once.
    """

    node_count: int
    edges: tuple[tuple[int, int, float], ...]
    directed: bool = True
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.node_count <= 0:
            raise ValidationError("node_count must be positive")
        seen = set()
        for src, dst, weight in self.edges:
            if not (0 <= src < self.node_count and 0 <= dst < self.node_count):
                raise ValidationError(
                    f"edge ({src},{dst}) outside node range [0,{self.node_count})"
                )
            if weight < 0:
                raise ValidationError(f"negative weight on edge ({src},{dst})")
            key = (src, dst) if self.directed or src <= dst else (dst, src)
            if key in seen:
                raise ValidationError(f"duplicate edge ({src},{dst})")
            seen.add(key)
        if self.labels is not None and len(self.labels) != self.node_count:
            raise ValidationError("labels length must equal node_count")

    @classmethod
    def from_edges(cls, node_count, edges, directed=True, labels=None):
        """Build a graph, merging duplicate edges by weight sum."""
        merged: dict[tuple[int, int], float] = {}
        for edge in edges:
            src, dst = int(edge[0]), int(edge[1])
            weight = float(edge[2]) if len(edge) > 2 else 1.0
            key = (src, dst) if directed or src <= dst else (dst, src)
            merged[key] = merged.get(key, 0.0) + weight
        return cls(
            node_count,
            tuple((s, d, w) for (s, d), w in sorted(merged.items())),
            directed=directed,
            labels=tuple(labels) if labels is not None else None,
        )


def load_edge_list(text, directed):
    """Parse an edge list: one ``src dst [weight]`` triple per line.

    ``#`` starts a comment line, blank lines are skipped, node ids are
    0-based integers, and the default weight is 1.0.  Duplicate edges merge
    by weight sum; for undirected input ``(1,0)`` and ``(0,1)`` are the same
    edge.
    """
    if hasattr(text, "read"):
        lines = text.read().splitlines()
    elif isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = [str(line).rstrip("\n") for line in text]

    edges: dict[tuple[int, int], float] = {}
    max_node = -1
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'src dst [weight]', got {raw!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: node ids must be integers, got {raw!r}") from None
        if src < 0 or dst < 0:
            raise ParseError(f"line {lineno}: node ids must be nonnegative")
        weight = 1.0
        if len(parts) == 3:
            try:
                weight = float(parts[2])
            except ValueError:
                raise ParseError(
                    f"line {lineno}: weight must be a real number, got {parts[2]!r}"
                ) from None
            if not math.isfinite(weight):
                raise ParseError(f"line {lineno}: weight must be finite")
            if weight < 0:
                raise ValidationError(f"line {lineno}: negative weight {weight}")
        key = (src, dst) if directed or src <= dst else (dst, src)
        edges[key] = edges.get(key, 0.0) + weight
        max_node = max(max_node, src, dst)

    if not edges:
        raise ValidationError("edge list contains no edges")
    return Graph(
        node_count=max_node + 1,
        edges=tuple((s, d, w) for (s, d), w in sorted(edges.items())),
        directed=directed,
    )


def adjacency(g):
    """Dense adjacency matrix of ``g`` with A[src, dst] = weight."""
    a = np.zeros((g.node_count, g.node_count))
    for src, dst, weight in g.edges:
        a[src, dst] += weight
        if not g.directed and src != dst:
            a[dst, src] += weight
    return a


def degrees(g):
    """Weighted degree of each node, taken as adjacency column sums."""
    return adjacency(g).sum(axis=0)


@dataclass(frozen=True)
class StochasticMatrix:
    """Square nonnegative matrix with validated unit line sums.

    ``convention`` is one of ``"row"``, ``"column"``, ``"doubly"``.  Entries
    are clipped at zero after a small-negative check, and the stored array
    is frozen.
    """

    matrix: np.ndarray
    convention: str
    tolerance: float = STOCHASTIC_TOL

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("stochastic matrix must be square")
        if self.convention not in ("row", "column", "doubly"):
            raise ValidationError(f"unknown stochastic convention {self.convention!r}")
        if not (0 < self.tolerance < 1):
            raise ValidationError("tolerance must lie in (0, 1)")
        if m.min(initial=0.0) < -self.tolerance:
            raise ValidationError("stochastic matrix entries must be nonnegative")
        m = np.clip(m, 0.0, None)
        if self.convention in ("row", "doubly"):
            dev = np.max(np.abs(m.sum(axis=1) - 1.0))
            if dev > self.tolerance:
                raise ValidationError(f"row sums deviate from 1 by {dev:.3e}")
        if self.convention in ("column", "doubly"):
            dev = np.max(np.abs(m.sum(axis=0) - 1.0))
            if dev > self.tolerance:
                raise ValidationError(f"column sums deviate from 1 by {dev:.3e}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]


def _distribution(v, dim, what="distribution"):
    v = np.asarray(v, dtype=float).ravel()
    if v.size != dim:
        raise ValidationError(f"{what} has {v.size} entries, expected {dim}")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ValidationError(f"{what} entries must be finite and nonnegative")
    if abs(v.sum() - 1.0) > STOCHASTIC_TOL:
        raise ValidationError(f"{what} must sum to 1 (got {v.sum()!r})")
    return v


def normalize(m, axis, dangling="error", w=None):
    """Divide each line of ``m`` by its sum, producing a stochastic matrix.

    ``axis`` selects rows or columns.  Zero-sum lines raise
    :class:`DegenerateInputError` under the default ``dangling="error"``
    policy; ``dangling="redistribute"`` replaces them with ``w`` (uniform
    when omitted), which is the classical dangling-node fix.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("normalize expects a square matrix")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValidationError("normalize expects finite nonnegative entries")
    if axis not in ("row", "column"):
        raise ValidationError(f"axis must be 'row' or 'column', got {axis!r}")
    if dangling not in ("error", "redistribute"):
        raise ValidationError(f"unknown dangling policy {dangling!r}")

    n = a.shape[0]
    sums = a.sum(axis=1 if axis == "row" else 0)
    zero = sums == 0.0
    out = a.copy()
    if np.any(zero):
        if dangling == "error":
            idx = int(np.argmax(zero))
            raise DegenerateInputError(f"{axis} {idx} sums to zero")
        fill = np.full(n, 1.0 / n) if w is None else _distribution(w, n, "redistribution weight")
    if axis == "row":
        out[~zero] /= sums[~zero, None]
        if np.any(zero):
            out[zero] = fill
    else:
        out[:, ~zero] /= sums[None, ~zero]
        if np.any(zero):
            out[:, zero] = fill[:, None]
    return StochasticMatrix(out, axis)


def google_matrix(p_hat, alpha, v):
    """Convex mixture ``alpha * P + (1 - alpha) * e v^T`` of a row-stochastic
    matrix with the rank-one teleportation matrix."""
    if not isinstance(p_hat, StochasticMatrix) or p_hat.convention not in ("row", "doubly"):
        raise ValidationError("google_matrix expects a row-stochastic matrix")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    v = _distribution(v, p_hat.dim, "teleportation vector")
    g = alpha * p_hat.matrix + (1.0 - alpha) * np.outer(np.ones(p_hat.dim), v)
    # divide rounding out of the row sums so the constructor's check is exact
    g /= g.sum(axis=1, keepdims=True)
    return StochasticMatrix(g, "row")


def kronecker(factors, cap=KRONECKER_CAP):
    """Explicit Kronecker product of square factors, left factor outermost.

    Refuses products beyond ``cap`` total dimension; use
    :class:`KroneckerOperator` for matrix-free application at larger sizes.
    """
    mats = [np.asarray(f) for f in factors]
    if not mats:
        raise ValidationError("at least one factor is required")
    total = 1
    for f in mats:
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValidationError("kronecker factors must be square")
        total *= f.shape[0]
    if total > cap:
        raise SizeError(f"product dimension {total} exceeds cap {cap}")
    out = mats[0]
    for f in mats[1:]:
        out = np.kron(out, f)
    return out


@dataclass(frozen=True)
class KroneckerOperator:
    """Ordered list of square factors applied matrix-free, left outermost.

    ``apply`` costs ``O(total_dim * sum(M_j))`` instead of the
    ``O(total_dim^2)`` of an explicit product.
    """

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValidationError("at least one factor is required")
        frozen = []
        for f in self.factors:
            f = np.array(f)
            if f.ndim != 2 or f.shape[0] != f.shape[1]:
                raise ValidationError("kronecker factors must be square")
            f.flags.writeable = False
            frozen.append(f)
        object.__setattr__(self, "factors", tuple(frozen))

    @property
    def total_dim(self):
        return math.prod(f.shape[0] for f in self.factors)

    def apply(self, x):
        return kron_apply(self, x)

    def materialize(self, cap=KRONECKER_CAP):
        return kronecker(self.factors, cap=cap)


def kron_apply(op, x):
    """Apply ``(A_1 (x) ... (x) A_k)`` to a vector without materialising it.

    Reshapes ``x`` into a ``(M_1, ..., M_k)`` tensor and contracts each
    factor along its own axis.
    """
    if not isinstance(op, KroneckerOperator):
        op = KroneckerOperator(tuple(op))
    x = np.asarray(x)
    if x.ndim != 1 or x.size != op.total_dim:
        raise ValidationError(
            f"vector has {x.size} entries, expected {op.total_dim}"
        )
    dims = [f.shape[0] for f in op.factors]
    t = x.reshape(dims)
    for axis, f in enumerate(op.factors):
        t = np.moveaxis(np.tensordot(f, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def isorank_operator(graph_list, isolated="error"):
    """Neighbourhood-averaging operator for network similarity flow.

    Each factor is the column-normalised adjacency ``A_j D_j^{-1}`` of an
    undirected graph, so the product operator is column-stochastic and one
    application spreads every product-node score uniformly over the
    neighbour pairs, divided by their degree product.  ``isolated`` follows
    the policy of :func:`normalize` for zero-degree nodes.
    """
    if not graph_list:
        raise ValidationError("at least one graph is required")
    factors = []
    for j, g in enumerate(graph_list):
        if g.directed:
            raise ValidationError(f"graph {j} is directed; undirected input required")
        a = adjacency(g)
        deg = a.sum(axis=0)
        if isolated == "error" and np.any(deg == 0.0):
            idx = int(np.argmax(deg == 0.0))
            raise DegenerateInputError(f"node {idx} of graph {j} is isolated")
        factors.append(normalize(a, "column", dangling=isolated).matrix)
    return KroneckerOperator(tuple(factors))


def parse_matrix(text):
    """Parse the matrix file format: a ``rows cols`` header line followed by
    ``rows`` whitespace-separated lines of ``cols`` floats."""
    lines = text.splitlines()
    stripped = [(i + 1, ln.strip()) for i, ln in enumerate(lines)]
    content = [(no, ln) for no, ln in stripped if ln]
    if not content:
        raise ParseError("line 1: missing 'rows cols' header")
    head_no, head = content[0]
    parts = head.split()
    if len(parts) != 2:
        raise ParseError(f"line {head_no}: header must be 'rows cols', got {head!r}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"line {head_no}: header must hold two integers") from None
    if rows <= 0 or cols <= 0:
        raise ParseError(f"line {head_no}: dimensions must be positive")
    body = content[1:]
    if len(body) != rows:
        raise ParseError(f"expected {rows} data lines, found {len(body)}")
    out = np.empty((rows, cols))
    for r, (no, ln) in enumerate(body):
        fields = ln.split()
        if len(fields) != cols:
            raise ParseError(f"line {no}: expected {cols} values, got {len(fields)}")
        try:
            out[r] = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"line {no}: values must be real numbers") from None
        if not np.all(np.isfinite(out[r])):
            raise ParseError(f"line {no}: values must be finite")
    return out


def format_matrix(m):
    """Inverse of :func:`parse_matrix`; floats are written in shortest
    round-trip form."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"
