"""JSON/CSV serialization for graphs, trees, optimizer configs and trajectories."""

import csv
import json

import numpy as np

from .errors import GraphValidationError
from .graph import make_graph
from .optimize import OptConfig
from .sptree import from_json as tree_from_json
from .sptree import to_json as tree_to_json


def _load_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise GraphValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise GraphValidationError(f"{path}: {exc.strerror}") from exc


def _matrix(data, k, context):
    try:
        m = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise GraphValidationError(f"{context}: weight is not a numeric matrix") from exc
    if m.shape != (k, k):
        raise GraphValidationError(f"{context}: expected a {k}x{k} matrix, got shape {m.shape}")
    return m


def graph_from_dict(data, context="graph"):
    for key in ("k", "nodes", "edges"):
        if key not in data:
            raise GraphValidationError(f"{context}: missing field {key!r}")
    k = data["k"]
    if not isinstance(k, int) or k < 1:
        raise GraphValidationError(f"{context}: k must be a positive integer")
    edges = []
    for n, e in enumerate(data["edges"]):
        for key in ("id", "tail", "head", "weight"):
            if key not in e:
                raise GraphValidationError(f"{context}: edge #{n} is missing field {key!r}")
        edges.append((e["id"], e["tail"], e["head"], _matrix(e["weight"], k, f"{context}: edge {e['id']!r}")))
    return make_graph(
        k,
        data["nodes"],
        edges,
        leaders=data.get("leaders", ()),
        sources=data.get("sources"),
    )


def load_graph(path):
    return graph_from_dict(_load_json(path), context=str(path))


def graph_to_dict(g):
    return {
        "k": g.k,
        "nodes": list(g.nodes),
        "edges": [
            {"id": e.id, "tail": e.tail, "head": e.head, "weight": e.weight.tolist()}
            for e in g.edges
        ],
        "leaders": sorted(g.leaders),
        "sources": list(g.sources),
    }


def save_graph(g, path):
    with open(path, "w") as f:
        json.dump(graph_to_dict(g), f, indent=2)
        f.write("\n")


def load_tree(path, g):
    return tree_from_json(_load_json(path), g)


def save_tree(t, path):
    with open(path, "w") as f:
        json.dump(tree_to_json(t), f, indent=2)
        f.write("\n")


def config_from_dict(data, k, context="config"):
    if "penalty_h" not in data:
        raise GraphValidationError(f"{context}: missing field 'penalty_h'")
    bounds = {}
    for eid, pair in data.get("bounds", {}).items():
        for key in ("L", "U"):
            if key not in pair:
                raise GraphValidationError(f"{context}: bounds for edge {eid!r} miss {key!r}")
        bounds[eid] = (
            _matrix(pair["L"], k, f"{context}: L bound of edge {eid!r}"),
            _matrix(pair["U"], k, f"{context}: U bound of edge {eid!r}"),
        )
    try:
        return OptConfig(
            penalty_h=data["penalty_h"],
            bounds=bounds,
            max_iters=data.get("max_iters", 200),
            grad_tol=data.get("grad_tol", 1e-8),
            proj_tol=data.get("proj_tol", 1e-10),
            proj_max_iter=data.get("proj_max_iter", 500),
            voltage_mode=data.get("voltage_mode", "compositional"),
            fallback_to_dense=data.get("fallback_to_dense", True),
        )
    except ValueError as exc:
        raise GraphValidationError(f"{context}: {exc}") from exc


def load_config(path, k):
    return config_from_dict(_load_json(path), k, context=str(path))


def weights_to_dict(weights):
    return {eid: w.tolist() for eid, w in sorted(weights.items())}


def write_trajectory_csv(traj, fileobj):
    writer = csv.writer(fileobj)
    writer.writerow(["iter", "objective", "h2_squared", "penalty", "grad_norm"])
    for r in traj.records:
        writer.writerow(
            [r.iteration, repr(r.objective), repr(r.h2_squared), repr(r.penalty), repr(r.grad_norm)]
        )
