"""Decomposition trees for two-terminal series-parallel multigraphs.

A tree is Leaf | Series | Parallel. Leaves carry the edge id and weight,
plus an optional oriented endpoint pair (tail = terminal on the source
side, head = terminal on the sink side) so that voltage drops computed on
the tree can be matched back to node-level quantities of the graph that
was decomposed.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import matlin
from .errors import GraphValidationError, NotSeriesParallelError
from .graph import make_graph


@dataclass(frozen=True, eq=False)
class Leaf:
    edge: str
    weight: np.ndarray
    tail: str = None
    head: str = None


@dataclass(frozen=True, eq=False)
class Series:
    left: object
    right: object


@dataclass(frozen=True, eq=False)
class Parallel:
    left: object
    right: object


def leaves(t):
    """Yield the leaves of a tree left-to-right."""
    if isinstance(t, Leaf):
        yield t
    else:
        yield from leaves(t.left)
        yield from leaves(t.right)


def dim(t):
    return next(leaves(t)).weight.shape[0]


def _validate_join(t1, t2):
    if dim(t1) != dim(t2):
        raise ValueError(f"dimension mismatch: {dim(t1)} vs {dim(t2)}")
    ids1 = {lf.edge for lf in leaves(t1)}
    ids2 = {lf.edge for lf in leaves(t2)}
    dup = ids1 & ids2
    if dup:
        raise ValueError(f"duplicate leaf edge ids {sorted(dup)}")


def series(t1, t2):
    """Series join: t1's sink is identified with t2's source."""
    _validate_join(t1, t2)
    return Series(t1, t2)


def parallel(t1, t2):
    """Parallel join: both terminal pairs are identified."""
    _validate_join(t1, t2)
    return Parallel(t1, t2)


def leaf(edge_id, weight, tail=None, head=None):
    weight = matlin.as_symmetric(weight)
    if not matlin.is_spd(weight):
        raise ValueError(f"leaf weight for edge {edge_id!r} is not strictly SPD")
    return Leaf(str(edge_id), weight, tail, head)


@dataclass(frozen=True)
class TreeStats:
    leaves: int
    series: int
    parallel: int
    height: int
    nodes: int  # node count of the realized two-terminal graph


def stats(t):
    """Leaf/join counts, height, and realized node count N = 2l - s - 2p."""
    if isinstance(t, Leaf):
        return TreeStats(1, 0, 0, 0, 2)
    a = stats(t.left)
    b = stats(t.right)
    l = a.leaves + b.leaves
    s = a.series + b.series + (1 if isinstance(t, Series) else 0)
    p = a.parallel + b.parallel + (1 if isinstance(t, Parallel) else 0)
    h = 1 + max(a.height, b.height)
    return TreeStats(l, s, p, h, 2 * l - s - 2 * p)


def check_height_bounds(t):
    """ceil(log2 l) <= h <= l - 1, with l recovered as (N + 2p + s)/2."""
    st = stats(t)
    l = (st.nodes + 2 * st.parallel + st.series) // 2
    return math.ceil(math.log2(l)) <= st.height <= l - 1


def flip(t):
    """Swap source and sink of the two-terminal network the tree encodes."""
    if isinstance(t, Leaf):
        return Leaf(t.edge, t.weight, t.head, t.tail)
    if isinstance(t, Series):
        return Series(flip(t.right), flip(t.left))
    return Parallel(flip(t.left), flip(t.right))


def realize(t):
    """Build the two-terminal multigraph a tree encodes.

    Returns (graph, source id, sink id). Node ids are generated fresh;
    series joins identify the left sink with the right source, parallel
    joins identify both terminal pairs.
    """
    counter = itertools.count()

    def fresh():
        return f"v{next(counter)}"

    def rec(node):
        if isinstance(node, Leaf):
            s, e = fresh(), fresh()
            return [(node.edge, s, e, node.weight)], s, e
        e1, s1, t1 = rec(node.left)
        e2, s2, t2 = rec(node.right)
        if isinstance(node, Series):
            ren = {s2: t1}
            out_s, out_t = s1, t2
        else:
            ren = {s2: s1, t2: t1}
            out_s, out_t = s1, t1
        e2 = [(eid, ren.get(a, a), ren.get(b, b), w) for eid, a, b, w in e2]
        out_t = ren.get(out_t, out_t)
        return e1 + e2, out_s, out_t

    edges, src, snk = rec(t)
    nodes = []
    for _, a, b, _ in edges:
        for n in (a, b):
            if n not in nodes:
                nodes.append(n)
    g = make_graph(dim(t), nodes, edges)
    return g, src, snk


def recognize(g, source, sink):
    """Decompose a connected two-terminal multigraph into an SpTree.

    Repeatedly contracts non-terminal degree-2 nodes into Series nodes and
    merges parallel edge pairs into Parallel nodes until a single edge
    between source and sink remains. Candidates are processed in ascending
    working-edge-id order, series contractions before parallel merges in
    each pass, so the result is deterministic. Raises
    NotSeriesParallelError if the reduction stalls.
    """
    if source not in g.nodes or sink not in g.nodes:
        raise GraphValidationError("terminal is not a node of the graph")
    if source == sink:
        raise GraphValidationError("source and sink must differ")

    # Working arcs: aid -> (u, v, tree oriented u -> v).
    arcs = {}
    adj = {n: set() for n in g.nodes}
    for aid, e in enumerate(g.edges):
        arcs[aid] = (e.tail, e.head, Leaf(e.id, e.weight, e.tail, e.head))
        adj[e.tail].add(aid)
        adj[e.head].add(aid)
    next_id = len(arcs)
    terminals = {source, sink}

    def oriented(aid, u):
        tail, head, tree = arcs[aid]
        if tail == u:
            return head, tree
        return tail, flip(tree)

    def drop(aid):
        u, v, _ = arcs.pop(aid)
        adj[u].discard(aid)
        adj[v].discard(aid)

    def add(u, v, tree):
        nonlocal next_id
        aid = next_id
        next_id += 1
        arcs[aid] = (u, v, tree)
        adj[u].add(aid)
        adj[v].add(aid)
        return aid

    while len(arcs) > 1:
        changed = False
        # Series contractions.
        for aid in sorted(arcs):
            if aid not in arcs:
                continue
            for node in arcs[aid][:2]:
                if node in terminals or len(adj[node]) != 2:
                    continue
                a, b = sorted(adj[node])
                p, tree_a = oriented(a, node)  # oriented node -> p
                q, tree_b = oriented(b, node)  # oriented node -> q
                if p == q:
                    continue  # parallel pair through this node; merge handles it
                # Flow runs p -> node -> q with the lower-id arc first.
                drop(a)
                drop(b)
                add(p, q, Series(flip(tree_a), tree_b))
                changed = True
                break
        # Parallel merges.
        groups = {}
        for aid in sorted(arcs):
            u, v, _ = arcs[aid]
            groups.setdefault(frozenset((u, v)), []).append(aid)
        for pair, aids in groups.items():
            while len(aids) > 1:
                a, b = aids[0], aids[1]
                u, v, tree_a = arcs[a]
                _, tree_b = oriented(b, u)
                drop(a)
                drop(b)
                merged = add(u, v, Parallel(tree_a, tree_b))
                aids = [merged] + aids[2:]
                changed = True
        if not changed:
            raise NotSeriesParallelError(
                f"reduction stalled with {len(arcs)} edges; graph is not "
                f"series-parallel between {source!r} and {sink!r}"
            )

    (u, v, tree) = next(iter(arcs.values()))
    if {u, v} != terminals:
        raise NotSeriesParallelError(
            f"reduction ended on edge {u!r}-{v!r}, not on the terminal pair"
        )
    return tree if u == source else flip(tree)


def to_json(t):
    """Tree as plain JSON data: leaves reference edges by id only."""
    if isinstance(t, Leaf):
        return {"op": "leaf", "edge": t.edge}
    op = "series" if isinstance(t, Series) else "parallel"
    return {"op": op, "children": [to_json(t.left), to_json(t.right)]}


def from_json(data, g):
    """Rebuild a tree from JSON data, resolving leaf weights against ``g``."""
    emap = g.edge_map()

    def rec(d):
        if not isinstance(d, dict) or "op" not in d:
            raise GraphValidationError("malformed tree JSON node")
        if d["op"] == "leaf":
            eid = d.get("edge")
            if eid not in emap:
                raise GraphValidationError(f"tree references unknown edge {eid!r}")
            e = emap[eid]
            return Leaf(e.id, e.weight, e.tail, e.head)
        if d["op"] not in ("series", "parallel"):
            raise GraphValidationError(f"unknown tree op {d['op']!r}")
        children = d.get("children", [])
        if len(children) != 2:
            raise GraphValidationError("tree join must have exactly two children")
        l, r = rec(children[0]), rec(children[1])
        return Series(l, r) if d["op"] == "series" else Parallel(l, r)

    return rec(data)
