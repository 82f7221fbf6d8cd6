"""Contraction graphs of permutation arrays.

Vertices are the permutations of an array; two permutations are joined
exactly when contracting both loses the maximum 3 units of Hamming
distance.  For the affine maps the non-isolated vertices fall into short
cycles, and for the fractional linear maps into q-1 isomorphic grid
components; both closed forms are built here and cross-checked against
the definitional pairwise builder at small q.
"""

from __future__ import annotations

import json
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .gf import (
    EvenCharacteristic,
    Field,
    NoGeneratorOutsideAvoid,
    NoRoots,
    find_generator,
    solve_unit_quadratic,
)
from .groups import ZeroR, agl_labels, agl_enumerate, alpha_map, p_form_perm, pgl_enumerate, pgl_labels
from .perm import MismatchedN, PArray, splitmix64_stream


class BadResidue(ValueError):
    """q is not congruent to 1 mod 3, so the cycle structure is absent."""


class IsolatedVertex(ValueError):
    """The vertex fixes the distinguished symbol and has no neighbors."""


class StructureViolation(AssertionError):
    """A structural guarantee failed; carries the offending witness."""

    def __init__(self, check: str, witness: object):
        super().__init__(f"{check}: witness {witness!r}")
        self.check = check
        self.witness = witness


class GeneratorIsUnitRoot(ValueError):
    """The chosen generator is a root of x^2 - x + 1, so the level-0
    return vertices are not pairwise distinct."""


class NotAGenerator(ValueError):
    """Explicit g does not generate the multiplicative group."""


# -- graph container ------------------------------------------------------


class CGraph:
    """Undirected graph with sorted adjacency and optional vertex labels."""

    __slots__ = ("n_vertices", "adj", "labels")

    def __init__(self, n_vertices: int, adj: Sequence[Sequence[int]], labels=None):
        self.n_vertices = n_vertices
        self.adj = tuple(tuple(sorted(nbrs)) for nbrs in adj)
        self.labels = tuple(labels) if labels is not None else None

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[tuple[int, int]], labels=None) -> "CGraph":
        adj: list[set[int]] = [set() for _ in range(n_vertices)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            adj[u].add(v)
            adj[v].add(u)
        return cls(n_vertices, adj, labels)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.adj[u]
        k = bisect_left(row, v)
        return k < len(row) and row[k] == v

    @property
    def edge_count(self) -> int:
        return sum(len(row) for row in self.adj) // 2

    def edges(self):
        for u, row in enumerate(self.adj):
            for v in row:
                if u < v:
                    yield (u, v)

    def first_conflict(self, vertices: Iterable[int]) -> Optional[tuple[int, int]]:
        """Lexicographically first adjacent pair within the set, else None."""
        chosen = sorted(set(vertices))
        members = set(chosen)
        for u in chosen:
            for v in self.adj[u]:
                if v > u and v in members:
                    return (u, v)
        return None

    def write_edges(self, path: str) -> None:
        with open(path, "w", encoding="ascii") as fh:
            for u, v in sorted(self.edges()):
                fh.write(f"{u},{v}\n")


def _bfs_component(adj: Sequence[Sequence[int]], start: int, seen: np.ndarray) -> list[int]:
    comp = [start]
    seen[start] = True
    queue = deque((start,))
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                comp.append(v)
                queue.append(v)
    return comp


def _connected_within(g: CGraph, vertices: Sequence[int]) -> bool:
    members = set(vertices)
    if not members:
        return True
    start = next(iter(members))
    seen = {start}
    queue = deque((start,))
    while queue:
        u = queue.popleft()
        for v in g.adj[u]:
            if v in members and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(members)


@dataclass(frozen=True)
class ComponentReport:
    n_vertices: int
    isolated: int
    cycles: dict[int, int]  # cycle length -> count
    other: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        covered = self.isolated + sum(k * c for k, c in self.cycles.items())
        covered += sum(len(c) for c in self.other)
        if covered != self.n_vertices:
            raise ValueError(f"component sizes cover {covered} of {self.n_vertices} vertices")

    @property
    def component_count(self) -> int:
        return self.isolated + sum(self.cycles.values()) + len(self.other)

    def to_json(self) -> str:
        return json.dumps(
            {
                "isolated": self.isolated,
                "cycles": {str(k): v for k, v in sorted(self.cycles.items())},
                "other": [list(c) for c in self.other],
            },
            sort_keys=True,
        )


def components(g: CGraph) -> ComponentReport:
    """BFS census: isolated vertices, cycles by length, anything else."""
    seen = np.zeros(g.n_vertices, dtype=bool)
    isolated = 0
    cycles: dict[int, int] = {}
    other: list[tuple[int, ...]] = []
    for start in range(g.n_vertices):
        if seen[start]:
            continue
        comp = _bfs_component(g.adj, start, seen)
        if len(comp) == 1:
            isolated += 1
        elif all(len(g.adj[v]) == 2 for v in comp):
            # connected and 2-regular is exactly a cycle
            cycles[len(comp)] = cycles.get(len(comp), 0) + 1
        else:
            other.append(tuple(sorted(comp)))
    return ComponentReport(g.n_vertices, isolated, cycles, tuple(other))


# -- definitional edges ---------------------------------------------------


def is_contraction_edge(p: Sequence[int], s: Sequence[int]) -> bool:
    """True iff contracting p and s loses 3 units of distance.

    With F the last symbol: both must move F, each must send the other's
    preimage of F onto the other's image of F.
    """
    if len(p) != len(s):
        raise MismatchedN(f"lengths {len(p)} and {len(s)}")
    if tuple(p) == tuple(s):
        return False
    F = len(p) - 1
    pF, sF = p[F], s[F]
    if pF == F or sF == F:
        return False
    return s[p.index(F)] == pF and p[s.index(F)] == sF


_BLOCK = 4096


def build_graph(arr: PArray, labels=None) -> CGraph:
    """Pairwise contraction graph of an array, vectorized in row blocks."""
    mat = arr.mat
    count, n = mat.shape
    F = n - 1
    img = mat[:, F]
    pre = np.argmax(mat == F, axis=1)
    moves = img != F
    edges: list[tuple[int, int]] = []
    for i0 in range(0, count, _BLOCK):
        i1 = min(i0 + _BLOCK, count)
        for j0 in range(i0, count, _BLOCK):
            j1 = min(j0 + _BLOCK, count)
            # fwd[x, y]: block-i row x maps block-j row y's preimage of F
            # onto row y's image of F; edge needs it in both directions
            fwd = mat[i0:i1][:, pre[j0:j1]] == img[j0:j1][None, :]
            bwd = (mat[j0:j1][:, pre[i0:i1]] == img[i0:i1][None, :]).T
            both = fwd & bwd & moves[i0:i1, None] & moves[None, j0:j1]
            for di, dj in np.argwhere(both):
                u, v = i0 + int(di), j0 + int(dj)
                if u < v:
                    edges.append((u, v))
    return CGraph.from_edges(count, edges, labels)


# -- affine closed form ---------------------------------------------------


def agl_neighbors(
    field: Field, a: int, r: int, t1: Optional[int] = None
) -> tuple[tuple[int, int], tuple[int, int]]:
    """The two neighbors of the non-isolated affine map x -> ax + r.

    Each neighbor scales the slope by a root of t^2 + t + 1 and shifts
    the intercept so the distance-drop conditions hold.
    """
    q = field.q
    F = q - 1
    if field.add(field.mul(a, F), r) == F:
        raise IsolatedVertex(f"map ({a}, {r}) fixes the last symbol")
    if t1 is None:
        t1 = solve_unit_quadratic(field)[0]
    out = []
    for t in (t1, field.inv(t1)):
        slope = field.mul(a, t)
        shift = field.add(
            field.mul(field.sub(a, t), F), field.mul(r, field.add(1, t))
        )
        out.append((slope, shift))
    return (out[0], out[1])


def agl_graph(field: Field, validate: Optional[bool] = None) -> CGraph:
    """Closed-form contraction graph of the affine maps, labelled (a, b)."""
    q = field.q
    if q % 3 != 1:
        raise BadResidue(f"q={q} is not 1 mod 3")
    t1, _ = solve_unit_quadratic(field)
    labels = agl_labels(field)
    index = {lab: k for k, lab in enumerate(labels)}
    F = q - 1
    edges = []
    for k, (a, r) in enumerate(labels):
        if field.add(field.mul(a, F), r) == F:
            continue
        for nbr in agl_neighbors(field, a, r, t1):
            other = index[nbr]
            if k < other:
                edges.append((k, other))
    g = CGraph.from_edges(len(labels), edges, labels)
    if validate is None:
        validate = q <= 13
    if validate:
        brute = build_graph(agl_enumerate(field))
        if g.adj != brute.adj:
            raise StructureViolation("agl-closed-form", _first_adj_diff(g, brute))
    return g


def _first_adj_diff(a: CGraph, b: CGraph) -> tuple[int, tuple, tuple]:
    for v in range(a.n_vertices):
        if a.adj[v] != b.adj[v]:
            return (v, a.adj[v], b.adj[v])
    raise AssertionError("graphs agree")


# -- fractional linear closed form ----------------------------------------


def pform_grid(field: Field, r: int) -> CGraph:
    """Grid on pairs (i, a), encoding a + r/(x - i), with (i, a)-(j, b)
    joined iff (b - a)(j - i) = r.  Vertex id is i*q + a."""
    if field.p == 2:
        raise EvenCharacteristic("grid components need odd characteristic")
    if r == 0:
        raise ZeroR("r = 0 is not a valid numerator")
    q = field.q
    edges = []
    for i, j in combinations(range(q), 2):
        delta = field.div(r, field.sub(j, i))
        for a in range(q):
            edges.append((i * q + a, j * q + field.add(a, delta)))
    labels = [(i, a) for i in range(q) for a in range(q)]
    return CGraph.from_edges(q * q, edges, labels)


def pgl_graph(field: Field, validate: Optional[bool] = None) -> CGraph:
    """Closed-form contraction graph of the fractional linear maps.

    Vertex order matches pgl_labels; affine rows (c = 0) are isolated and
    the rest join iff they share the numerator r and satisfy the grid
    relation on (pole, constant) pairs.
    """
    q = field.q
    labels = pgl_labels(field)
    by_r: dict[int, dict[tuple[int, int], int]] = {}
    for vid, (a, b, c, d) in enumerate(labels):
        if c == 0:
            continue
        k_const, r, i = alpha_map(field, a, b, c, d)
        by_r.setdefault(r, {})[(i, k_const)] = vid
    edges = []
    for r, grid in by_r.items():
        for i, j in combinations(range(q), 2):
            delta = field.div(r, field.sub(j, i))
            for a in range(q):
                edges.append((grid[(i, a)], grid[(j, field.add(a, delta))]))
    g = CGraph.from_edges(len(labels), edges, labels)
    if validate is None:
        validate = q <= 13
    if validate:
        brute = build_graph(pgl_enumerate(field))
        if g.adj != brute.adj:
            raise StructureViolation("pgl-closed-form", _first_adj_diff(g, brute))
    return g


# -- structure verification ------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    q: int
    guaranteed: bool  # the q >= 13 theorem hypotheses hold
    degree_regular: bool
    level_matchings: bool
    neighborhoods_two_regular: bool
    connected: bool
    phi_preserves_edges: bool
    census_ok: bool
    isolated: int
    nontrivial_components: int
    failures: tuple[str, ...]

    def ok(self) -> bool:
        return not self.failures


def _check_degrees(field: Field, grid: CGraph) -> Optional[tuple]:
    q = field.q
    for v in range(grid.n_vertices):
        if grid.degree(v) != q - 1:
            return (grid.labels[v], grid.degree(v))
    return None


def _check_matchings(field: Field, grid: CGraph) -> Optional[tuple]:
    # degree q-1 with one neighbor per foreign level is exactly the
    # statement that every level pair induces a perfect matching
    q = field.q
    for v in range(grid.n_vertices):
        own = v // q
        seen_levels = sorted(u // q for u in grid.adj[v])
        if seen_levels != sorted(set(range(q)) - {own}):
            return (grid.labels[v], seen_levels)
    return None


def _check_neighborhoods(grid: CGraph) -> Optional[tuple]:
    adj_sets = [set(row) for row in grid.adj]
    for v in range(grid.n_vertices):
        nbrs = grid.adj[v]
        members = adj_sets[v]
        for u in nbrs:
            inner = len(adj_sets[u] & members)
            if inner != 2:
                return (grid.labels[v], grid.labels[u], inner)
    return None


def _check_phi(
    field: Field, grid: CGraph, seed: int, r_count: int, pair_count: int
) -> Optional[tuple]:
    """Sampled semantic check: map (i, a) to a + r/(x - ri) and compare
    grid adjacency with the distance-drop predicate on real permutations."""
    q = field.q
    edge_list = sorted(grid.edges())
    counter = iter(range(1 << 30))

    def draw(bound: int) -> int:
        return int(splitmix64_stream(seed, 1, offset=next(counter))[0] % bound)

    rs = {1}
    while len(rs) < min(r_count, q - 1):
        rs.add(1 + draw(q - 1))
    pairs = [(edge_list[draw(len(edge_list))], True) for _ in range(pair_count)]
    while len(pairs) < 2 * pair_count:
        u = draw(grid.n_vertices)
        v = draw(grid.n_vertices)
        if u != v and not grid.has_edge(u, v):
            pairs.append(((u, v), False))
    for r in sorted(rs):
        for (u, v), expect in pairs:
            iu, au = grid.labels[u]
            iv, av = grid.labels[v]
            pu = p_form_perm(field, au, r, field.mul(r, iu))
            pv = p_form_perm(field, av, r, field.mul(r, iv))
            if is_contraction_edge(pu, pv) != expect:
                return (r, grid.labels[u], grid.labels[v], expect)
    return None


def verify_pgl_structure(
    field: Field,
    seed: int = 0,
    r_count: int = 3,
    pair_count: int = 120,
    strict: Optional[bool] = None,
) -> StructureReport:
    """Check the six structural guarantees of the fractional linear graph.

    Below q = 13 the guarantees are observational: the report records
    failures without raising.
    """
    q = field.q
    if field.p == 2:
        raise EvenCharacteristic(f"q={q} is even")
    if q % 3 != 1:
        raise BadResidue(f"q={q} is not 1 mod 3")
    if strict is None:
        strict = q >= 13
    grid = pform_grid(field, 1)
    failures = []
    witnesses = {}

    def record(name: str, witness: Optional[tuple]) -> bool:
        if witness is not None:
            failures.append(name)
            witnesses[name] = witness
        return witness is None

    degree_ok = record("degree-regular", _check_degrees(field, grid))
    matching_ok = record("level-matchings", _check_matchings(field, grid))
    nbr_ok = record("neighborhood-2-regular", _check_neighborhoods(grid))
    conn = _connected_within(grid, range(grid.n_vertices))
    conn_ok = record("connected", None if conn else ("components", grid.n_vertices))
    phi_ok = record("phi-edges", _check_phi(field, grid, seed, r_count, pair_count))

    census = components(pgl_graph(field))
    census_good = (
        census.isolated == q * (q - 1)
        and not census.cycles
        and len(census.other) == q - 1
        and all(len(c) == q * q for c in census.other)
    )
    census_ok = record(
        "census",
        None if census_good else (census.isolated, dict(census.cycles), len(census.other)),
    )

    report = StructureReport(
        q=q,
        guaranteed=strict and q >= 13,
        degree_regular=degree_ok,
        level_matchings=matching_ok,
        neighborhoods_two_regular=nbr_ok,
        connected=conn_ok,
        phi_preserves_edges=phi_ok,
        census_ok=census_ok,
        isolated=census.isolated,
        nontrivial_components=len(census.other),
        failures=tuple(failures),
    )
    if strict and failures:
        raise StructureViolation(failures[0], witnesses[failures[0]])
    return report


# -- the level path through a grid component -------------------------------


@dataclass(frozen=True)
class PathCoeffs:
    g: int
    alpha: tuple[int, ...]  # alpha[k-1] pairs with level g^k
    beta: tuple[int, ...]
    distinct_level0: bool


def _unit_root_set(field: Field) -> set[int]:
    # roots of x^2 - x + 1 are the negated roots of x^2 + x + 1
    try:
        t1, t2 = solve_unit_quadratic(field)
    except NoRoots:
        return set()
    return {field.neg(t1), field.neg(t2)}


def path_coeffs(field: Field, g: Optional[int] = None, strict: Optional[bool] = None) -> PathCoeffs:
    """Constants along the unique path from (0, 0) through levels g^k.

    alpha_k is the constant of the path vertex at level k; beta_k the
    constant of its unique level-0 neighbor.  Every value is checked
    against both the edge relation and the closed forms.
    """
    q = field.q
    if field.p == 2:
        raise EvenCharacteristic(f"q={q} is even")
    if q % 3 != 1:
        raise BadResidue(f"q={q} is not 1 mod 3")
    if strict is None:
        strict = q >= 13
    roots = _unit_root_set(field)
    if g is None:
        try:
            g = find_generator(field, avoid=roots)
        except NoGeneratorOutsideAvoid:
            if strict:
                raise GeneratorIsUnitRoot(f"every generator of GF({q})* is a unit root")
            g = find_generator(field)
    else:
        if field.order(g) != q - 1:
            raise NotAGenerator(f"{g} has order {field.order(g)} in GF({q})*")
        if g in roots and strict:
            raise GeneratorIsUnitRoot(f"g={g} is a root of x^2 - x + 1")

    powers = [1]
    for _ in range(q - 1):
        powers.append(field.mul(powers[-1], g))
    alpha = [field.inv(g)]
    for k in range(2, q):
        step = field.inv(field.sub(powers[k], powers[k - 1]))
        alpha.append(field.add(alpha[-1], step))
    beta = [field.sub(alpha[k - 1], field.inv(powers[k])) for k in range(1, q)]

    gm1 = field.sub(g, 1)
    assert beta[0] == 0
    assert alpha[1] == field.inv(gm1)
    geom = 1  # sum of g^0 .. g^t, grown incrementally
    for k in range(3, q):
        num = field.add(powers[k - 1], geom)
        assert alpha[k - 1] == field.div(num, field.mul(gm1, powers[k - 1]))
        geom = field.add(geom, powers[k - 2])
    unit = field.add(field.sub(field.mul(g, g), g), 1)
    geom = 1
    for k in range(2, q):
        denom = field.mul(powers[k], gm1)
        assert beta[k - 1] == field.div(field.mul(unit, geom), denom)
        geom = field.add(geom, powers[k - 1])
    for k in range(1, q):
        if k >= 2:
            gap = field.sub(powers[k], powers[k - 1])
            assert field.mul(field.sub(alpha[k - 1], alpha[k - 2]), gap) == 1
        assert field.mul(field.sub(alpha[k - 1], beta[k - 1]), powers[k]) == 1

    distinct = len(set(beta)) == q - 1
    if strict and not distinct:
        raise StructureViolation("level0-distinct", (g, len(set(beta))))
    return PathCoeffs(g=g, alpha=tuple(alpha), beta=tuple(beta), distinct_level0=distinct)


@dataclass(frozen=True)
class PartitionReport:
    hub: int  # the one level-0 vertex missed by the path returns
    path_block: tuple[int, ...]
    star_block: tuple[int, ...]
    is_partition: bool
    path_connected: bool
    star_connected: bool


def level_zero_partition(field: Field, g: Optional[int] = None) -> PartitionReport:
    """Split the r=1 grid into the path-reachable block and the star
    around the unique level-0 vertex the path never returns to."""
    pc = path_coeffs(field, g)
    grid = pform_grid(field, 1)
    q = field.q
    returns = {0 * q + b for b in pc.beta}
    block = set(returns)
    for z in returns:
        block.update(grid.adj[z])
    (hub,) = set(range(q)) - returns  # level-0 ids are 0*q + a
    star = {hub, *grid.adj[hub]}
    is_partition = not (block & star) and len(block) + len(star) == grid.n_vertices
    return PartitionReport(
        hub=hub,
        path_block=tuple(sorted(block)),
        star_block=tuple(sorted(star)),
        is_partition=is_partition,
        path_connected=_connected_within(grid, sorted(block)),
        star_connected=_connected_within(grid, sorted(star)),
    )
