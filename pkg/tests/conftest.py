import random

import pytest

from tropabel.divisor import Divisor, Polarization
from tropabel.graph import Graph, build_graph


@pytest.fixture
def theta():
    """Two vertices, three parallel edges, leg 0 at v0."""
    return build_graph(
        {
            "vertices": [{"id": "v0", "weight": 0}, {"id": "v1", "weight": 0}],
            "edges": [
                {"id": "e0", "ends": ["v0", "v1"]},
                {"id": "e1", "ends": ["v0", "v1"]},
                {"id": "e2", "ends": ["v0", "v1"]},
            ],
            "legs": {"0": "v0"},
        }
    )


@pytest.fixture
def single_vertex():
    return build_graph({"vertices": [{"id": "v", "weight": 1}], "edges": [], "legs": {"0": "v"}})


def random_connected_graph(rng, max_edges=5, max_extra_vertices=2, allow_loops=True, max_weight=2):
    """Random small connected multigraph with leg 0, deterministic under rng."""
    n_edges = rng.randint(1, max_edges)
    lo = 1 if allow_loops else 2
    n_vertices = rng.randint(lo, max(lo, min(n_edges + 1, 1 + max_extra_vertices + 1)))
    vids = [f"v{i}" for i in range(n_vertices)]
    edges = []
    # spanning tree first so the graph is connected
    for i in range(1, n_vertices):
        a = vids[rng.randrange(i)]
        edges.append((f"e{len(edges)}", (a, vids[i])))
    while len(edges) < n_edges:
        a = rng.choice(vids)
        b = rng.choice(vids)
        if a == b and not allow_loops:
            continue
        edges.append((f"e{len(edges)}", tuple(sorted((a, b)))))
    vertices = tuple((v, rng.randint(0, max_weight)) for v in vids)
    return Graph(vertices, tuple(edges), ((0, vids[0]),))


def random_divisor(rng, g, degree=None, spread=3):
    vals = {v: rng.randint(-spread, spread) for v in g.vertex_ids}
    if degree is not None:
        first = g.vertex_ids[0]
        vals[first] += degree - sum(vals.values())
    return Divisor.of(g, vals)


def random_polarization(rng, g, degree=0):
    from fractions import Fraction

    vals = {v: Fraction(rng.randint(-4, 4), rng.choice([1, 2, 2, 4])) for v in g.vertex_ids}
    first = g.vertex_ids[0]
    vals[first] += degree - sum(vals.values())
    return Polarization.of(g, vals)
