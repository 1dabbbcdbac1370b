"""Monomial computations in the dual-lattice semigroup ring of a cone and in
its node extension obtained by adjoining a split variable pair with
x * y = chi^(relation covector).

Everything is decided at the level of exponents: ideal membership reduces to
lattice-cone inequalities, so no Groebner machinery is needed.  Generator
lists come from bounded searches over a generating set of the monoid, with a
saturation re-check at a larger bound.
"""

from dataclasses import dataclass
from functools import cached_property

from .cone import Cone, semigroup_generators
from .errors import SearchBoundError, ValidationError
from .graph import cycle_basis, subdivide
from .linalg import dot, vec_add, vec_sub

DEFAULT_SEARCH_BOUND = 12


@dataclass(frozen=True)
class MonomialRing:
    """Monomials over the dual monoid of a cone, optionally extended by a
    split pair x, y with x*y = chi^relation.

    rays: the cone's extremal rays (membership tests pair against them);
    relation: the integer covector tied to the split pair, or None for the
    plain semigroup ring.
    """

    ambient_dim: int
    rays: tuple
    relation: tuple = None

    @staticmethod
    def for_cone(cone, relation=None):
        return MonomialRing(cone.ambient_dim, cone.rays, relation)

    @cached_property
    def generators(self):
        """Monoid generating set of the chi-part (units included if the cone
        is not full-dimensional)."""
        cone = Cone.from_rays(self.ambient_dim, self.rays)
        return semigroup_generators(cone)

    def in_monoid(self, u):
        return all(dot(u, r) >= 0 for r in self.rays)

    def monomial(self, u, a=0, b=0):
        u = tuple(int(x) for x in u)
        a, b = int(a), int(b)
        if a < 0 or b < 0:
            raise ValidationError("negative split exponents")
        if (a or b) and self.relation is None:
            raise ValidationError("split exponents need a split-pair ring")
        if self.relation is not None:
            k = min(a, b)
            if k:
                u = tuple(x + k * y for x, y in zip(u, self.relation))
                a, b = a - k, b - k
        if not self.in_monoid(u):
            raise ValidationError(f"exponent {u} is outside the monoid")
        return Monomial(self, u, a, b)

    def one(self):
        return self.monomial((0,) * self.ambient_dim)

    def x(self):
        return self.monomial((0,) * self.ambient_dim, a=1)

    def y(self):
        return self.monomial((0,) * self.ambient_dim, b=1)

    @cached_property
    def monomial_generators(self):
        """Ring generating monomials: the chi-generators plus x and y."""
        gens = [self.monomial(u) for u in self.generators]
        if self.relation is not None:
            gens.append(self.x())
            gens.append(self.y())
        return tuple(gens)


@dataclass(frozen=True)
class Monomial:
    """Canonical form x^a y^b chi^u with min(a, b) = 0."""

    ring: MonomialRing
    u: tuple
    a: int
    b: int

    def key(self):
        return (self.u, self.a, self.b)

    def __mul__(self, other):
        if other.ring != self.ring:
            raise ValidationError("ring mismatch")
        return self.ring.monomial(vec_add(self.u, other.u), self.a + other.a, self.b + other.b)

    def __pow__(self, n):
        out = self.ring.one()
        for _ in range(n):
            out = out * self
        return out

    def divides(self, other):
        """Exact divisibility in the quotient by x*y = chi^relation.

        The quotient exponent (du, da, db) lies in the extended monoid iff
        some integer shift j >= max(-da, -db) keeps du - j*relation in the
        chi-monoid; j is bounded above through any ray pairing positively
        with the relation covector.
        """
        if other.ring != self.ring:
            raise ValidationError("ring mismatch")
        du = vec_sub(other.u, self.u)
        da = other.a - self.a
        db = other.b - self.b
        ring = self.ring
        if ring.relation is None:
            return da == 0 and db == 0 and ring.in_monoid(du)
        rel = ring.relation
        jlo = max(-da, -db)
        jhi = None
        for r in ring.rays:
            cr = dot(rel, r)
            if cr > 0:
                bound = dot(du, r) // cr
                jhi = bound if jhi is None else min(jhi, bound)
        if jhi is None:
            # relation vanishes on the cone: j only needs to clear jlo
            return ring.in_monoid(du)
        for j in range(jlo, jhi + 1):
            shifted = tuple(x - j * y for x, y in zip(du, rel))
            if ring.in_monoid(shifted):
                return True
        return False

    def format(self):
        parts = []
        if self.a:
            parts.append(f"x^{self.a}" if self.a != 1 else "x")
        if self.b:
            parts.append(f"y^{self.b}" if self.b != 1 else "y")
        body = ",".join(str(c) for c in self.u)
        parts.append("χ{" + body + "}")
        return " ".join(parts)

    @staticmethod
    def parse(ring, text):
        """Inverse of format: 'x^a y^b chi{c1,c2,...}' with chi = U+03C7."""
        a = b = 0
        u = None
        for tok in text.split():
            if tok.startswith("x"):
                a = int(tok[2:]) if tok.startswith("x^") else 1
            elif tok.startswith("y"):
                b = int(tok[2:]) if tok.startswith("y^") else 1
            elif tok.startswith("χ{") and tok.endswith("}"):
                body = tok[2:-1]
                u = tuple(int(c) for c in body.split(",")) if body else ()
            else:
                raise ValidationError(f"bad monomial token {tok!r}")
        if u is None:
            u = (0,) * ring.ambient_dim
        return ring.monomial(u, a, b)


def monomial_in_principal(m, g):
    """Membership of m in the principal ideal generated by g."""
    return g.divides(m)


def _minimalize(monomials):
    """Drop every monomial divisible by another one (proper or duplicate)."""
    uniq = []
    seen = set()
    for m in sorted(monomials, key=lambda m: m.key()):
        if m.key() not in seen:
            uniq.append(m)
            seen.add(m.key())
    out = []
    for i, m in enumerate(uniq):
        divisible = False
        for j, g in enumerate(uniq):
            if i != j and g.divides(m):
                if m.divides(g) and j > i:
                    continue  # mutual (unit multiple): keep the first
                divisible = True
                break
        if not divisible:
            out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class MonomialIdeal:
    """Finitely generated monomial ideal with minimalized generators."""

    ring: MonomialRing
    gens: tuple

    @staticmethod
    def of(ring, monomials):
        return MonomialIdeal(ring, _minimalize(tuple(monomials)))

    @staticmethod
    def whole(ring):
        return MonomialIdeal.of(ring, (ring.one(),))

    def contains(self, m):
        return any(g.divides(m) for g in self.gens)

    def is_whole(self):
        return self.contains(self.ring.one())

    def product(self, other):
        return MonomialIdeal.of(self.ring, (g * h for g in self.gens for h in other.gens))

    def power(self, n):
        out = MonomialIdeal.whole(self.ring)
        for _ in range(n):
            out = out.product(self)
        return out

    def equals(self, other):
        return all(other.contains(g) for g in self.gens) and all(
            self.contains(h) for h in other.gens
        )

    def format(self):
        return [g.format() for g in self.gens]


def _bfs_minimal(start, member, alphabet, bound, what):
    """Breadth-first minimal monomials above `start` satisfying a
    divisor-closed predicate.

    Hits stop their branch; states divisible by an earlier hit are pruned
    (extensions stay multiples).  The walk stops two levels after the last
    new minimal hit (the saturation contract: raising the coefficient bound
    by 2 adds nothing), and raises SearchBoundError when the cap is reached
    without that certificate.
    """
    hits = []
    frontier = {start.key(): start}
    visited = {start.key()}
    level = 0
    last_new = None
    while frontier:
        if last_new is not None and level > last_new + 2:
            return hits
        if level > bound + 2:
            raise SearchBoundError(what, bound)
        nxt = {}
        for m in frontier.values():
            if member(m):
                if not any(w.divides(m) for w in hits):
                    hits.append(m)
                    last_new = level
                continue
            if any(w.divides(m) for w in hits):
                continue
            for t in alphabet:
                nm = m * t
                if nm.key() not in visited:
                    visited.add(nm.key())
                    nxt[nm.key()] = nm
        frontier = nxt
        level += 1
    return hits


def _monomial_size(m):
    return sum(abs(c) for c in m.u) + m.a + m.b


def _join_search(ring, g, h, bound):
    """Minimal common multiples of g and h, walking up from the larger one."""
    if _monomial_size(h) > _monomial_size(g):
        g, h = h, g
    return _bfs_minimal(
        g,
        lambda m: h.divides(m),
        ring.monomial_generators,
        bound,
        "ideal intersection",
    )


def intersect_ideals(ideal_a, ideal_b, bound=DEFAULT_SEARCH_BOUND):
    """Generators of the intersection, by pairwise bounded join searches."""
    if ideal_a.ring != ideal_b.ring:
        raise ValidationError("ring mismatch")
    ring = ideal_a.ring
    cands = []
    for g in ideal_a.gens:
        for h in ideal_b.gens:
            cands.extend(_join_search(ring, g, h, bound))
    result = MonomialIdeal.of(ring, cands)
    for m in result.gens:
        assert ideal_a.contains(m) and ideal_b.contains(m)
    return result


def intersect_many(ideals, bound=DEFAULT_SEARCH_BOUND):
    out = None
    for ideal in ideals:
        out = ideal if out is None else intersect_ideals(out, ideal, bound=bound)
    return out


def localization_preimage(ring, face_rays, target, bound=DEFAULT_SEARCH_BOUND):
    """Preimage of the principal ideal (target) under localization at the
    face spanned by the given primal rays.

    Membership: the quotient exponent pairs nonnegatively with the face data
    (for the split ring, against both lifts (r, 0, c_r) and (r, c_r, 0)).
    Returns (ideal, membership predicate).
    """
    face_rays = tuple(tuple(r) for r in face_rays)
    rel = ring.relation

    def member(m):
        du = vec_sub(m.u, target.u)
        da = m.a - target.a
        db = m.b - target.b
        if rel is None:
            if da or db:
                return False
            return all(dot(du, r) >= 0 for r in face_rays)
        # pairing with (r, c_r, 0) and (r, 0, c_r); shift-invariant
        for r in face_rays:
            cr = dot(rel, r)
            if dot(du, r) + da * cr < 0:
                return False
            if dot(du, r) + db * cr < 0:
                return False
        return True

    # generators pairing to zero with every face ray cannot help reach
    # membership and never occur in a minimal generator's factorization
    alphabet = []
    for t in ring.monomial_generators:
        if t.a or t.b or any(dot(t.u, r) != 0 for r in face_rays):
            alphabet.append(t)
    gens = _bfs_minimal(ring.one(), member, alphabet, bound, "localization preimage")
    return MonomialIdeal.of(ring, gens), member


@dataclass(frozen=True)
class BoundaryFunctionals:
    """The two dual covectors attached to a subdivided edge of an admissible
    pair; their sum is the edge's coordinate functional, and on every
    extremal ray at least one of them vanishes."""

    edge: str
    upstream_flow: int
    downstream_flow: int
    u_prime: tuple
    u_second: tuple


def boundary_functionals(pair, e0):
    """Covectors u' and u'' of a subdivided edge, from the fundamental cycle
    through e0 of the spanning tree avoiding the subdivided set.

    The cycle is signed so that it traverses e0 along the flow direction.
    """
    from .abelfan import _signed_flow, _through_sign

    g = pair.base
    if e0 not in pair.eset:
        raise ValidationError(f"{e0} is not in the subdivided set")
    basis = cycle_basis(g, avoid=pair.eset)
    gamma = dict(basis.cycle_map[e0])
    sub = pair.resulting_pd.subdivision
    ha, hb = sub.halves[e0]
    fa, fb = pair.flow.flow_map[ha], pair.flow.flow_map[hb]
    if fb == fa + 1:
        s_half, t_half = ha, hb
    elif fa == fb + 1:
        s_half, t_half = hb, ha
    else:  # pragma: no cover
        raise ValidationError("half flows do not differ by one unit")
    # re-sign the cycle so it traverses e0 along the flow, and pair it with
    # flow-signed values on the tree edges
    sflow = _signed_flow(sub, pair.flow)
    if _through_sign(sub, pair.flow, e0) < 0:
        gamma = {e: -s for e, s in gamma.items()}
    phi_s, phi_t = pair.flow.flow_map[s_half], pair.flow.flow_map[t_half]
    edges = g.edge_ids
    idx = {e: i for i, e in enumerate(edges)}
    u_prime = [0] * len(edges)
    u_second = [0] * len(edges)
    for f, sgn in gamma.items():
        if f == e0:
            continue
        u_prime[idx[f]] = -sgn * sflow[f]
        u_second[idx[f]] = sgn * sflow[f]
    u_prime[idx[e0]] = -phi_s
    u_second[idx[e0]] = phi_t
    out = BoundaryFunctionals(e0, phi_s, phi_t, tuple(u_prime), tuple(u_second))
    _assert_functionals(pair, out)
    return out


def _assert_functionals(pair, bf):
    from .abelfan import merged_cone

    g = pair.base
    idx = {e: i for i, e in enumerate(g.edge_ids)}
    e0vee = [0] * len(g.edge_ids)
    e0vee[idx[bf.edge]] = 1
    assert vec_add(bf.u_prime, bf.u_second) == tuple(e0vee)
    ac = merged_cone(g, pair)
    sub = pair.resulting_pd.subdivision
    ha, hb = sub.halves[bf.edge]
    order = ac.split_edge_order
    for r in ac.cone.rays:
        vp, vs = dot(bf.u_prime, r), dot(bf.u_second, r)
        assert vp >= 0 and vs >= 0, "functional negative on a ray"
        assert vp == 0 or vs == 0, "neither functional vanishes on a ray"
        # contraction clauses: a vanishing downstream half kills u', a
        # vanishing upstream half kills u''
        split = ac.split_point(r)
        fa, fb = pair.flow.flow_map[ha], pair.flow.flow_map[hb]
        s_half, t_half = (ha, hb) if fb == fa + 1 else (hb, ha)
        if split[t_half] == 0:
            assert vp == 0
        if split[s_half] == 0:
            assert vs == 0
        if vp == 0 and vs == 0:
            assert r[idx[bf.edge]] == 0


def node_ring(pair, e0):
    """The split-pair ring of an admissible pair at one of its base edges:
    chi-monomials over the pair's cone, x and y tied by the coordinate
    functional of e0."""
    from .abelfan import merged_cone

    g = pair.base
    ac = merged_cone(g, pair)
    idx = {e: i for i, e in enumerate(g.edge_ids)}
    rel = [0] * len(g.edge_ids)
    rel[idx[e0]] = 1
    return MonomialRing(len(g.edge_ids), ac.cone.rays, tuple(rel)), ac


def symbolic_power_membership(ring, ray, n, m):
    """Monomial membership in the n-th symbolic power at an extremal ray:
    u(ray) >= (n - b) * relation(ray)."""
    if ring.relation is None:
        raise ValidationError("symbolic powers live in the split-pair ring")
    c = dot(ring.relation, ray)
    return dot(m.u, ray) >= (n - m.b) * c


def symbolic_power_ideal(ring, ray, n, bound=DEFAULT_SEARCH_BOUND):
    """Generator list of the n-th symbolic power at a ray.

    Candidates are y^b chi^u for b = 0..n with u minimal against the
    threshold (n-b) * relation(ray); the union is minimalized in the full
    ring.
    """
    c = dot(ring.relation, ray)
    cands = [ring.y() ** n]
    # a minimal exponent against a single ray threshold never uses a
    # generator pairing to zero with that ray (dropping it keeps membership)
    chi_gens = [ring.monomial(u) for u in ring.generators if dot(u, ray) > 0]
    for b in range(n):
        need = (n - b) * c
        yfac = ring.y() ** b
        hits = _bfs_minimal(
            ring.one(),
            lambda m, need=need: dot(m.u, ray) >= need,
            chi_gens,
            bound,
            "symbolic power saturation",
        )
        cands.extend(yfac * h for h in hits)
    ideal = MonomialIdeal.of(ring, cands)
    for g in ideal.gens:
        assert symbolic_power_membership(ring, ray, n, g)
    return ideal


def ray_power_intersection(pair, e0, bound=DEFAULT_SEARCH_BOUND):
    """Intersection over the extremal rays of the ray-wise symbolic powers,
    with the closed form verified two-sidedly.

    For a subdivided edge the exponents split by which boundary functional
    vanishes on the ray, and the closed form is
    (y)^upstream * (y, chi^u'') ; for an unsubdivided edge every ray carries
    the plain flow exponent and the closed form is (y)^flow(e0).
    Returns (intersection ideal, closed-form ideal).
    """
    ring, ac = node_ring(pair, e0)
    rays = ac.cone.rays
    if e0 in pair.eset:
        bf = boundary_functionals(pair, e0)
        n_s, n_t = bf.upstream_flow, bf.downstream_flow
        pieces = []
        for r in rays:
            if dot(bf.u_prime, r) == 0 and dot(bf.u_second, r) == 0:
                continue  # relation vanishes there, the power is the ring
            if dot(bf.u_prime, r) == 0:
                if n_t > 0:
                    pieces.append(symbolic_power_ideal(ring, r, n_t, bound=bound))
            elif dot(bf.u_second, r) == 0:
                if n_s > 0:
                    pieces.append(symbolic_power_ideal(ring, r, n_s, bound=bound))
        lhs = intersect_many(pieces, bound=bound) if pieces else MonomialIdeal.whole(ring)
        rhs_gens = [ring.y() ** (n_s + 1), (ring.y() ** n_s) * ring.monomial(bf.u_second)]
        rhs = MonomialIdeal.of(ring, rhs_gens)
    else:
        n = pair.flow.flow_map[e0]
        if n == 0:
            return MonomialIdeal.whole(ring), MonomialIdeal.whole(ring)
        pieces = [symbolic_power_ideal(ring, r, n, bound=bound) for r in rays]
        lhs = intersect_many(pieces, bound=bound)
        rhs = MonomialIdeal.of(ring, (ring.y() ** n,))
    assert lhs.equals(rhs), "two-sided symbolic-power identity failed"
    return lhs, rhs


def model_ring(t):
    """k[x, y, u]/(x y - u^t): the single-ray ring with relation (t,)."""
    return MonomialRing(1, ((1,),), (t,))


def model_symbolic_power(t, m, height_cap=None):
    """Symbolic power of (y, u) in the model ring, by x-saturation of the
    ordinary power: a monomial belongs iff x^k times it falls into the
    ordinary power for some k."""
    ring = model_ring(t)
    y, u = ring.y(), ring.monomial((1,))
    base = MonomialIdeal.of(ring, (y, u))
    ordinary = base.power(m)
    cap = height_cap if height_cap is not None else m * t + t

    def member(mono):
        probe = mono
        for _ in range(cap + 1):
            if ordinary.contains(probe):
                return True
            probe = probe * ring.x()
        return False

    cands = []
    for b in range(m + 2):
        for s in range(m * t + t + 1):
            mono = ring.monomial((s,), b=b)
            if member(mono):
                cands.append(mono)
    ideal = MonomialIdeal.of(ring, cands)
    return ideal, member
