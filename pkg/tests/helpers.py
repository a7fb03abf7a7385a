"""Shared generators and oracles for the test suite."""

import itertools

import numpy as np

from spnet.graph import make_graph
from spnet.h2 import dense_h2
from spnet.sptree import Leaf, Parallel, Series, leaf, parallel, realize, series


def random_spd(rng, k, lo=0.5, hi=2.0):
    """Random SPD matrix with eigenvalues drawn uniformly from [lo, hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    eig = rng.uniform(lo, hi, size=k)
    m = (q * eig) @ q.T
    return 0.5 * (m + m.T)


def random_psd(rng, k, hi=1.0):
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    eig = rng.uniform(0.0, hi, size=k)
    m = (q * eig) @ q.T
    return 0.5 * (m + m.T)


def random_sptree(rng, k, n_leaves, prefix="e", lo=0.5, hi=2.0):
    """Random complete SP tree with the given number of leaves."""
    counter = itertools.count()

    def build(n):
        if n == 1:
            return leaf(f"{prefix}{next(counter)}", random_spd(rng, k, lo, hi))
        split = int(rng.integers(1, n))
        left, right = build(split), build(n - split)
        return series(left, right) if rng.random() < 0.5 else parallel(left, right)

    return build(n_leaves)


def enumerate_sptrees(n_leaves, k=1, weight=1.0):
    """All complete SP trees with exactly n_leaves leaves (shapes x op labels)."""
    counter = itertools.count()

    def shapes(n):
        if n == 1:
            yield ("leaf",)
            return
        for split in range(1, n):
            for left in shapes(split):
                for right in shapes(n - split):
                    for op in ("series", "parallel"):
                        yield (op, left, right)

    def build(shape):
        if shape[0] == "leaf":
            return Leaf(f"e{next(counter)}", weight * np.eye(k))
        cls = Series if shape[0] == "series" else Parallel
        return cls(build(shape[1]), build(shape[2]))

    for shape in shapes(n_leaves):
        counter = itertools.count()
        yield build(shape)


def random_aittsp(rng, k, n_sources, leaves_per_link=4, lo=0.5, hi=2.0):
    """Random all-input TTSP consensus network.

    Sources form a chain; each consecutive pair is linked by the
    realization of a random SP tree, so after grounding the leaders the
    quotient is TTSP from every source to the sink.
    """
    nodes = []
    edges = []
    for i in range(n_sources):
        nodes += [f"r{i}", f"s{i}"]
        edges.append((f"a{i}", f"r{i}", f"s{i}", np.eye(k)))
    for i in range(n_sources - 1):
        n_leaves = int(rng.integers(1, leaves_per_link + 1))
        sub = random_sptree(rng, k, n_leaves, prefix=f"c{i}_", lo=lo, hi=hi)
        sub_g, src, snk = realize(sub)
        rename = {src: f"s{i}", snk: f"s{i + 1}"}
        for n in sub_g.nodes:
            if n not in rename:
                rename[n] = f"m{i}_{n}"
                nodes.append(rename[n])
        for e in sub_g.edges:
            edges.append((e.id, rename[e.tail], rename[e.head], e.weight))
    return make_graph(k, nodes, edges, leaders=[f"r{i}" for i in range(n_sources)])


def fd_gradient_direction(g, edge_id, direction, step=1e-5):
    """Central finite difference of the dense squared H2 norm along one
    symmetric weight perturbation direction."""
    base = g.edge_map()[edge_id].weight
    plus = dense_h2(g.with_weights({edge_id: base + step * direction})).total
    minus = dense_h2(g.with_weights({edge_id: base - step * direction})).total
    return (plus - minus) / (2.0 * step)


def random_symmetric(rng, k):
    m = rng.standard_normal((k, k))
    m = 0.5 * (m + m.T)
    return m / np.linalg.norm(m, "fro")
