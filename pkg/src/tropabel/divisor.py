"""Divisors, pseudo-divisors, polarizations, the beta function, quasistability
and the poset of quasistable pseudo-divisors.

Everything touching beta is exact: half-integers are Fractions, never floats,
because stability is decided by strict comparison with 0.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .errors import DeskScaleError, ValidationError
from .graph import Graph, exceptional_id, subdivide

DEFAULT_SUBSET_CAP = 1 << 20


@dataclass(frozen=True)
class Divisor:
    """Integer vertex values on a fixed graph."""

    graph: Graph
    values: tuple  # sorted (vertex, int)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(sorted((str(v), int(c)) for v, c in self.values)))
        vm = dict(self.values)
        for v in vm:
            if v not in self.graph.weight:
                raise ValidationError(f"divisor keys unknown vertex {v}")
        object.__setattr__(self, "_map", {v: vm.get(v, 0) for v in self.graph.vertex_ids})

    @staticmethod
    def of(graph, mapping):
        return Divisor(graph, tuple(mapping.items()))

    def __getitem__(self, v):
        return self._map[v]

    def degree(self):
        return sum(self._map.values())

    def restricted_degree(self, vset):
        return sum(self._map[v] for v in vset)

    def add(self, other):
        assert self.graph == other.graph
        return Divisor.of(self.graph, {v: self[v] + other[v] for v in self.graph.vertex_ids})

    def sub(self, other):
        assert self.graph == other.graph
        return Divisor.of(self.graph, {v: self[v] - other[v] for v in self.graph.vertex_ids})

    def lift_to_subdivision(self, sub):
        """The divisor on the subdivision that is 0 at exceptional vertices."""
        vals = {v: self[v] for v in self.graph.vertex_ids}
        vals.update({x: 0 for x in sub.exceptional})
        return Divisor.of(sub.result, vals)

    def restrict_to(self, graph):
        """Forget vertices not present in `graph` (values there must exist)."""
        return Divisor.of(graph, {v: self._map.get(v, 0) for v in graph.vertex_ids})

    def to_json(self):
        return {v: c for v, c in self.values if c != 0}


@dataclass(frozen=True)
class Polarization:
    """Exact rational vertex weighting with integer total degree."""

    graph: Graph
    values: tuple  # sorted (vertex, Fraction)

    def __post_init__(self):
        vals = []
        for v, c in self.values:
            c = Fraction(c)
            vals.append((str(v), c))
        object.__setattr__(self, "values", tuple(sorted(vals)))
        vm = dict(self.values)
        for v in vm:
            if v not in self.graph.weight:
                raise ValidationError(f"polarization keys unknown vertex {v}")
        object.__setattr__(self, "_map", {v: vm.get(v, Fraction(0)) for v in self.graph.vertex_ids})
        total = sum(self._map.values())
        if total.denominator != 1:
            raise ValidationError(f"polarization degree {total} is not an integer")

    @staticmethod
    def of(graph, mapping):
        return Polarization(graph, tuple(mapping.items()))

    @staticmethod
    def zero(graph):
        return Polarization(graph, ())

    def __getitem__(self, v):
        return self._map[v]

    def degree(self):
        return int(sum(self._map.values()))

    def restricted(self, vset):
        return sum((self._map[v] for v in vset), Fraction(0))

    def lift_to_subdivision(self, sub):
        vals = {v: self[v] for v in self.graph.vertex_ids}
        vals.update({x: Fraction(0) for x in sub.exceptional})
        return Polarization.of(sub.result, vals)

    def removed_edges_shift(self, eset):
        """The polarization mu_E on the edge-removed graph: mu + val_E/2."""
        g2 = self.graph.remove_edges(eset)
        return Polarization.of(
            g2, {v: self[v] + Fraction(self.graph.valence(v, set(eset)), 2) for v in g2.vertex_ids}
        )

    def pushforward(self, spec):
        vals = {v: Fraction(0) for v in spec.target.vertex_ids}
        for v in self.graph.vertex_ids:
            vals[spec(v)] += self[v]
        return Polarization.of(spec.target, vals)

    def to_json(self):
        return {v: f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator) for v, c in self.values}


@dataclass(frozen=True)
class PseudoDivisor:
    """A pair (E, D): D lives on the E-subdivision with -1 at every
    exceptional vertex."""

    base: Graph
    eset: frozenset
    divisor: Divisor

    def __post_init__(self):
        sub = subdivide(self.base, self.eset)
        if self.divisor.graph != sub.result:
            raise ValidationError("divisor does not live on the E-subdivision")
        for x in sub.exceptional:
            if self.divisor[x] != -1:
                raise ValidationError(f"exceptional vertex {x} must carry -1")
        object.__setattr__(self, "_sub", sub)

    @property
    def subdivision(self):
        return self._sub

    @staticmethod
    def of(base, eset, values):
        sub = subdivide(base, eset)
        return PseudoDivisor(base, frozenset(eset), Divisor.of(sub.result, values))

    def degree(self):
        return self.divisor.degree()

    def canonical_key(self):
        return (tuple(sorted(self.eset)), self.divisor.values)

    def to_json(self):
        return {"E": sorted(self.eset), "D": dict(self.divisor.values)}


def beta(div, pol, vset):
    """deg(D|_V) - mu(V) + delta_V / 2, as an exact Fraction."""
    if div.graph != pol.graph:
        raise ValidationError("divisor and polarization live on different graphs")
    vset = set(vset)
    for v in vset:
        if v not in div.graph.weight:
            raise ValidationError(f"unknown vertex id {v}")
    return div.restricted_degree(vset) - pol.restricted(vset) + Fraction(div.graph.delta(vset), 2)


def _quasistable_on_graph(div, v0, pol):
    """Direct definition: beta >= 0 on proper subsets, strict when v0 inside."""
    g = div.graph
    verts = g.vertex_ids
    n = len(verts)
    for r in range(1, n):
        for subset in combinations(verts, r):
            b = beta(div, pol, subset)
            if v0 in subset:
                if b <= 0:
                    return False
            elif b < 0:
                return False
    return True


def is_quasistable(pd, v0, pol):
    """Quasistability of a pseudo-divisor, cross-checked two ways.

    The direct route tests beta on every proper subset of the subdivision;
    the reduction route demands E nondisconnecting plus quasistability of the
    restricted divisor on the edge-removed graph against the shifted
    polarization.  Both must agree.
    """
    if pol.graph != pd.base:
        raise ValidationError("polarization lives on the wrong graph")
    if v0 not in pd.base.weight:
        raise ValidationError(f"unknown base vertex {v0}")
    lifted = pol.lift_to_subdivision(pd.subdivision)
    direct = _quasistable_on_graph(pd.divisor, v0, lifted)
    if pd.base.is_nondisconnecting(pd.eset):
        reduced_pol = pol.removed_edges_shift(pd.eset)
        reduced_div = pd.divisor.restrict_to(reduced_pol.graph)
        via_removal = _quasistable_on_graph(reduced_div, v0, reduced_pol)
    else:
        via_removal = False
    assert direct == via_removal, "quasistability cross-check failed"
    return direct


def compatible_pushforward(pd, e, half):
    """Push a pseudo-divisor along the contraction of one half of e in E.

    `half` selects the endpoint absorbing the exceptional -1: one of the two
    result edges over e.  Returns the pseudo-divisor with E' = E - {e}.
    """
    if e not in pd.eset:
        raise ValidationError(f"{e} is not subdivided")
    sub = pd.subdivision
    ha, hb = sub.halves[e]
    if half not in (ha, hb):
        raise ValidationError(f"{half} is not a half of {e}")
    x = exceptional_id(e)
    tail, head = sub.dir_map[half]
    absorbed = tail if tail != x else head
    new_e = pd.eset - {e}
    vals = {}
    newsub = subdivide(pd.base, new_e)
    for v in newsub.result.vertex_ids:
        vals[v] = pd.divisor[v]
    vals[absorbed] += pd.divisor[x]
    return PseudoDivisor.of(pd.base, new_e, vals)


def pushforward(spec, pd):
    """Pseudo-divisor pushforward along a graph specialization.

    E' = E minus the contracted edges; the induced map on subdivisions sends
    surviving exceptional vertices to themselves and sums divisor values over
    fibers.  Degree is preserved.
    """
    if spec.source != pd.base:
        raise ValidationError("specialization source mismatch")
    new_e = frozenset(pd.eset - spec.contracted)
    newsub = subdivide(spec.target, new_e)
    vals = {v: 0 for v in newsub.result.vertex_ids}
    sub = pd.subdivision
    for v in sub.result.vertex_ids:
        if v in pd.base.weight:
            vals[spec(v)] += pd.divisor[v]
        else:
            e = v[2:]  # strip the "x:" prefix
            if e in spec.contracted:
                a, b = pd.base.ends[e]
                vals[spec(a)] += pd.divisor[v]
            else:
                vals[v] += pd.divisor[v]
    return PseudoDivisor.of(spec.target, new_e, vals)


def _value_windows(sub, pol_lifted, base_vertices):
    windows = {}
    for v in base_vertices:
        d = sub.result.delta({v})
        lo = pol_lifted[v] - Fraction(d, 2)
        hi = pol_lifted[v] + Fraction(d, 2)
        windows[v] = range(math.ceil(lo), math.floor(hi) + 1)
    return windows


@dataclass(frozen=True)
class QuasistablePoset:
    """All quasistable pseudo-divisors of a polarized 1-legged graph, ordered
    by specialization; covers link (E, D) to its single-edge pushforwards."""

    elements: tuple  # PseudoDivisor, canonically sorted
    covers: tuple  # (i, j) index pairs: element i covers element j

    def index(self, pd):
        key = pd.canonical_key()
        for i, el in enumerate(self.elements):
            if el.canonical_key() == key:
                return i
        raise KeyError(key)

    def downset(self, i):
        below = {i}
        frontier = [i]
        rel = {}
        for a, b in self.covers:
            rel.setdefault(a, []).append(b)
        while frontier:
            a = frontier.pop()
            for b in rel.get(a, ()):
                if b not in below:
                    below.add(b)
                    frontier.append(b)
        return frozenset(below)

    def to_json(self):
        return {
            "elements": [pd.to_json() for pd in self.elements],
            "covers": [list(c) for c in self.covers],
        }


def enumerate_quasistable(g, v0, pol, cap=DEFAULT_SUBSET_CAP):
    """The full poset of quasistable pseudo-divisors of degree deg(mu).

    Per-vertex values are pruned to the window mu(v) +- delta_v/2 before the
    full subset test.  Raises DeskScaleError past `cap` candidate checks.
    """
    if pol.graph != g:
        raise ValidationError("polarization lives on the wrong graph")
    d = pol.degree()
    checks = 0
    found = []
    edge_ids = list(g.edge_ids)
    for r in range(len(edge_ids) + 1):
        for eset in combinations(edge_ids, r):
            eset = frozenset(eset)
            sub = subdivide(g, eset)
            lifted = pol.lift_to_subdivision(sub)
            windows = _value_windows(sub, lifted, g.vertex_ids)
            base_verts = list(g.vertex_ids)
            target_total = d + len(eset)
            for combo in product(*(windows[v] for v in base_verts)):
                if sum(combo) != target_total:
                    continue
                checks += 1
                if checks > cap:
                    raise DeskScaleError(
                        f"quasistable enumeration exceeded {cap} subset checks; "
                        "instance is beyond desk scale"
                    )
                vals = dict(zip(base_verts, combo))
                vals.update({x: -1 for x in sub.exceptional})
                pd = PseudoDivisor(g, eset, Divisor.of(sub.result, vals))
                if is_quasistable(pd, v0, pol):
                    found.append(pd)
    found.sort(key=lambda p: p.canonical_key())
    index = {pd.canonical_key(): i for i, pd in enumerate(found)}
    covers = set()
    for i, pd in enumerate(found):
        for e in sorted(pd.eset):
            for half in pd.subdivision.halves[e]:
                smaller = compatible_pushforward(pd, e, half)
                j = index.get(smaller.canonical_key())
                assert j is not None, "pushforward left the quasistable poset"
                covers.add((i, j))
    return QuasistablePoset(tuple(found), tuple(sorted(covers)))
