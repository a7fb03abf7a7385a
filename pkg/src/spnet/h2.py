"""H2 performance of leader-follower consensus networks.

Three routes to the squared norm: the exact compositional value read off a
decomposition tree per source (half the trace of the root effective
resistance), a scalar compositional upper bound that folds scalar
series/parallel rules over the tree, and a dense oracle that inverts the
Dirichlet Laplacian directly and works on any connected graph, SP or not.
"""

from dataclasses import dataclass

import numpy as np

from . import electrical, matlin
from .errors import GraphValidationError
from .graph import dirichlet_laplacian, ground_leaders
from .sptree import Leaf, Series, recognize


@dataclass(frozen=True)
class H2Report:
    per_source: dict  # source id -> squared contribution
    total: float
    method: str  # exact-compositional | scalar-bound | dense-oracle

    def to_dict(self):
        return {
            "total_h2_squared": self.total,
            "per_source": dict(self.per_source),
            "method": self.method,
        }


def h2_exact_single_source(t):
    """Exact squared norm for one source: half the trace of the root resistance."""
    res = electrical.effective_resistance(t)
    return 0.5 * float(np.trace(res[0]))


def h2_exact_aittsp(trees):
    """Sum of per-source exact values, one decomposition tree per source."""
    per_source = {s: h2_exact_single_source(t) for s, t in trees.items()}
    return H2Report(per_source=per_source, total=sum(per_source.values()), method="exact-compositional")


def h2_series_compose(a, b):
    """Series rule: squared norms add exactly."""
    _check_positive(a, b)
    return a + b


def h2_parallel_compose(a, b):
    """Parallel rule: scalar parallel sum; an upper bound on the join's value."""
    _check_positive(a, b)
    return a * b / (a + b)


def _check_positive(a, b):
    if a <= 0 or b <= 0:
        raise ValueError("compositional H2 values must be positive")


def h2_scalar_bound(t):
    """Fold the scalar composition rules over a tree.

    Always an upper bound on the exact squared norm; tight whenever all
    subtree resistances met at parallel joins are pairwise proportional,
    in particular for k = 1 and for series-only trees.
    """
    if isinstance(t, Leaf):
        return 0.5 * float(np.trace(matlin.pinv(t.weight)))
    a = h2_scalar_bound(t.left)
    b = h2_scalar_bound(t.right)
    return h2_series_compose(a, b) if isinstance(t, Series) else h2_parallel_compose(a, b)


def source_trees(g):
    """Ground the leaders and decompose the quotient from every source.

    Returns (trees keyed by source id, grounded graph, sink id). Raises
    NotSeriesParallelError if the grounded graph is not TTSP from some
    source.
    """
    gg, sink = ground_leaders(g)
    if not gg.sources:
        raise GraphValidationError("graph has no source nodes")
    trees = {s: recognize(gg, s, sink) for s in gg.sources}
    return trees, gg, sink


def compositional_h2(g, method="exact"):
    """Compositional squared norm of a consensus network (exact or bound)."""
    trees, _, _ = source_trees(g)
    if method == "exact":
        return h2_exact_aittsp(trees)
    if method == "bound":
        per_source = {s: h2_scalar_bound(t) for s, t in trees.items()}
        return H2Report(per_source=per_source, total=sum(per_source.values()), method="scalar-bound")
    raise ValueError(f"unknown compositional method {method!r}")


def dense_h2(g):
    """Dense oracle: half the trace of the source blocks of A(W)^-1."""
    if not g.sources:
        raise GraphValidationError("graph has no source nodes")
    dl = dirichlet_laplacian(g)
    a_inv = np.linalg.inv(dl.matrix)
    k = g.k
    per_source = {}
    for s in g.sources:
        i = dl.follower_order.index(s)
        per_source[s] = 0.5 * float(np.trace(a_inv[k * i : k * i + k, k * i : k * i + k]))
    return H2Report(per_source=per_source, total=sum(per_source.values()), method="dense-oracle")


def dense_voltages(g, source):
    """Voltage drop Y_i^s of every node to the grounded leader set.

    Solves A(W) x = e_s (x) I_k and extracts the k x k blocks; leader
    nodes get a zero block (their drop vanishes by construction).
    """
    if source in g.leaders:
        raise GraphValidationError(f"source {source!r} is a leader node")
    dl = dirichlet_laplacian(g)
    k = g.k
    n = len(dl.follower_order)
    rhs = np.zeros((k * n, k))
    i = dl.follower_order.index(source)
    rhs[k * i : k * i + k, :] = np.eye(k)
    x = np.linalg.solve(dl.matrix, rhs)
    out = {node: x[k * j : k * j + k, :] for j, node in enumerate(dl.follower_order)}
    for leader in g.leaders:
        out[leader] = np.zeros((k, k))
    return out


def lyapunov_residual(g):
    """Frobenius residual of the candidate Gramian P = A^-1 / 2.

    The squared norm equals Tr(B^T P B) with P solving
    -A P - P A^T + I = 0; this evaluates that equation's residual directly.
    """
    dl = dirichlet_laplacian(g)
    a = dl.matrix
    p = 0.5 * np.linalg.inv(a)
    n = a.shape[0]
    return float(np.linalg.norm(-a @ p - p @ a.T + np.eye(n), "fro"))
