"""Sharply transitive permutation families and their group machinery.

Three element sources feed the contraction pipeline: the affine maps
x -> ax + b over GF(q), the fractional-linear maps (ax+b)/(cx+d) on
GF(q) + {oo}, and the five sporadic Mathieu groups given by embedded
generators.  Field elements double as symbols through their canonical
indices, with the extra projective point oo encoded as symbol q.

The Mathieu side is driven by a deterministic Schreier-Sims construction:
base points are chosen as the smallest moved point (after any forced
prefix), orbits are breadth-first in generator order, so bases,
transversals and element enumeration are reproducible run to run.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from importlib import resources
from itertools import combinations
from math import lcm
from typing import Iterable, Optional, Sequence

import numpy as np

from .gf import Field, ParseError
from .perm import (
    MismatchedN,
    PArray,
    compose,
    cycle_type,
    identity,
    inverse,
    parse_cycles,
    splitmix64_stream,
)


class ZeroR(ValueError):
    """A restricted fractional map needs r != 0."""


class ZeroC(ValueError):
    """Conversion to restricted form needs c != 0."""


class UnsupportedDegree(ValueError):
    """No embedded Mathieu group of that degree."""


class OrderExceedsCap(ValueError):
    """Refusing to enumerate a group beyond the element cap."""


class OrderExceedsProbeCap(ValueError):
    """Refusing to probe a subgroup beyond the probe cap."""


class BadGenerators(ValueError):
    """Loaded generators fail the order/transitivity validation."""


# -- affine maps ------------------------------------------------------------------


def agl_labels(field: Field) -> list[tuple[int, int]]:
    """Canonical (slope, intercept) order: slope ascending, then intercept."""
    return [(a, b) for a in field.units() for b in field.elements()]


def agl_enumerate(field: Field) -> PArray:
    """All q(q-1) maps x -> ax + b as image strings on the symbols 0..q-1."""
    add_t, mul_t, _, _ = field.np_tables()
    q = field.q
    blocks = []
    for a in field.units():
        # rows indexed by intercept b: block[b, x] = a*x + b
        blocks.append(add_t[mul_t[a]].T)
    mat = np.concatenate(blocks, axis=0).astype(np.uint8)
    return PArray(mat, n=q, validate=False)


# -- fractional linear maps ---------------------------------------------------------


def mobius_perm(field: Field, a: int, b: int, c: int, d: int) -> tuple[int, ...]:
    """Image string of (ax+b)/(cx+d) on GF(q) + {oo}, with oo encoded as q."""
    q = field.q
    if field.sub(field.mul(a, d), field.mul(b, c)) == 0:
        raise ZeroR(f"determinant of ({a},{b},{c},{d}) vanishes")
    images = []
    for x in field.elements():
        den = field.add(field.mul(c, x), d)
        if den == 0:
            images.append(q)
        else:
            images.append(field.div(field.add(field.mul(a, x), b), den))
    images.append(field.div(a, c) if c != 0 else q)
    return tuple(images)


def pgl_labels(field: Field) -> list[tuple[int, int, int, int]]:
    """Canonical coefficient order: the first nonzero of (a,b,c,d) is scaled to 1.

    All a=1 maps come first, ordered by (b, c, d) with d != bc; then the a=0
    maps with b=1, ordered by (c, d) with c != 0.
    """
    labels = []
    for b in field.elements():
        for c in field.elements():
            bc = field.mul(b, c)
            labels.extend((1, b, c, d) for d in field.elements() if d != bc)
    for c in field.units():
        labels.extend((0, 1, c, d) for d in field.elements())
    return labels


def pgl_enumerate(field: Field) -> PArray:
    """All (q+1)q(q-1) fractional linear maps on q+1 symbols, label order."""
    add_t, mul_t, inv_t, _ = field.np_tables()
    q = field.q
    xs = np.arange(q)
    rows = np.empty((q * q * (q - 1) + q * (q - 1), q + 1), dtype=np.uint8)
    k = 0
    for b in field.elements():
        num1 = add_t[xs, b]  # x + b
        for c in field.elements():
            cx = mul_t[c]
            bc = field.mul(b, c)
            for d in field.elements():
                if d == bc:
                    continue
                den = add_t[cx, d]
                img = np.where(den == 0, q, mul_t[num1, inv_t[den]])
                rows[k, :q] = img
                rows[k, q] = inv_t[c] if c != 0 else q
                k += 1
    for c in field.units():
        cx = mul_t[c]
        for d in field.elements():
            den = add_t[cx, d]
            rows[k, :q] = np.where(den == 0, q, inv_t[den])
            rows[k, q] = 0
            k += 1
    assert k == rows.shape[0]
    return PArray(rows, n=q + 1, validate=False)


def p_form_perm(field: Field, k_const: int, r: int, i: int) -> tuple[int, ...]:
    """Image string of x -> K + r/(x - i), sending i -> oo and oo -> K."""
    if r == 0:
        raise ZeroR("restricted form needs r != 0")
    q = field.q
    images = []
    for x in field.elements():
        if x == i:
            images.append(q)
        else:
            images.append(field.add(k_const, field.div(r, field.sub(x, i))))
    images.append(k_const)
    return tuple(images)


def alpha_map(field: Field, a: int, b: int, c: int, d: int) -> tuple[int, int, int]:
    """Rewrite (ax+b)/(cx+d) with c != 0 as the triple (K, r, i).

    K = a/c, r = (bc - ad)/c^2, i = -d/c, so the map is K + r/(x - i).
    """
    if c == 0:
        raise ZeroC("affine maps have no restricted form")
    k_const = field.div(a, c)
    r = field.div(
        field.sub(field.mul(b, c), field.mul(a, d)), field.mul(c, c)
    )
    i = field.neg(field.div(d, c))
    if r == 0:
        raise ZeroR(f"map ({a},{b},{c},{d}) is degenerate")
    return k_const, r, i


# -- base and strong generating sets ---------------------------------------------


def _smallest_moved(p: Sequence[int]) -> int:
    return min(x for x in range(len(p)) if p[x] != x)


class BSGS:
    """Deterministic base / strong generating set with explicit transversals.

    The base starts with `base_prefix` (redundant points allowed) and is then
    extended greedily by the smallest point moved by the offending residue.
    Composition is left to right throughout, matching perm.compose.
    """

    def __init__(self, n: int, generators: Iterable[Sequence[int]], base_prefix: Sequence[int] = ()):
        self.n = n
        self._ident = identity(n)
        gens = []
        for g in generators:
            g = tuple(g)
            if len(g) != n:
                raise MismatchedN(f"generator on {len(g)} points, expected {n}")
            if g != self._ident and g not in gens:
                gens.append(g)
        self.generators = gens
        self.base: list[int] = []
        self._tr: list[dict[int, tuple[int, ...]]] = []
        self._lgens: list[list[tuple[int, ...]]] = []
        for pt in base_prefix:
            self._append_level(pt)
        for g in gens:
            if all(g[b] == b for b in self.base):
                self._append_level(_smallest_moved(g))
        self.strong_gens: list[tuple[int, ...]] = list(gens)
        for j in range(len(self.base)):
            self._lgens[j] = [g for g in gens if all(g[b] == b for b in self.base[:j])]
            self._rebuild_orbit(j)
        self._close()
        assert all(self.contains(g) for g in gens)

    # construction internals

    def _append_level(self, pt: int) -> None:
        self.base.append(pt)
        self._lgens.append([])
        self._tr.append({pt: self._ident})

    def _rebuild_orbit(self, j: int) -> None:
        b = self.base[j]
        tr = {b: self._ident}
        queue = [b]
        for beta in queue:
            u = tr[beta]
            for s in self._lgens[j]:
                t = s[beta]
                if t not in tr:
                    tr[t] = compose(u, s)
                    queue.append(t)
        self._tr[j] = tr

    def _strip(self, g: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
        for i in range(len(self.base)):
            beta = g[self.base[i]]
            u = self._tr[i].get(beta)
            if u is None:
                return g, i
            g = compose(g, inverse(u))
        return g, len(self.base)

    def _first_violation(self, i: int):
        tr = self._tr[i]
        for beta in list(tr.keys()):
            u = tr[beta]
            for s in self._lgens[i]:
                sg = compose(compose(u, s), inverse(tr[s[beta]]))
                if sg == self._ident:
                    continue
                res, lvl = self._strip(sg)
                if res != self._ident:
                    return res, lvl
        return None

    def _close(self) -> None:
        i = len(self.base) - 1
        while i >= 0:
            hit = self._first_violation(i)
            if hit is None:
                i -= 1
                continue
            res, lvl = hit
            if lvl == len(self.base):
                self._append_level(_smallest_moved(res))
            self.strong_gens.append(res)
            for j in range(i + 1, lvl + 1):
                self._lgens[j].append(res)
                self._rebuild_orbit(j)
            i = lvl

    # queries

    def order(self) -> int:
        out = 1
        for tr in self._tr:
            out *= len(tr)
        return out

    def orbit_sizes(self) -> tuple[int, ...]:
        return tuple(len(tr) for tr in self._tr)

    def contains(self, g: Sequence[int]) -> bool:
        if len(g) != self.n:
            return False
        res, _ = self._strip(tuple(g))
        return res == self._ident

    def transversal_trace(self, targets: Sequence[int]) -> tuple[int, ...]:
        """Some element mapping base[i] -> targets[i] for each given target."""
        if len(targets) > len(self.base):
            raise ValueError("more targets than base points")
        h = self._ident
        hinv = self._ident
        for i, t in enumerate(targets):
            tp = hinv[t]
            u = self._tr[i].get(tp)
            if u is None:
                raise ValueError(f"no element maps base prefix to {tuple(targets)}")
            h = compose(u, h)
            hinv = inverse(h)
        return h

    def subgroup_elements(self, from_level: int = 0, cap: int = 1_000_000) -> list[tuple[int, ...]]:
        """All elements of the chain subgroup fixing base[:from_level]."""
        size = 1
        for tr in self._tr[from_level:]:
            size *= len(tr)
        if size > cap:
            raise OrderExceedsCap(f"order {size} exceeds cap {cap}")
        elems = [self._ident]
        for i in reversed(range(from_level, len(self.base))):
            reps = [self._tr[i][beta] for beta in sorted(self._tr[i])]
            elems = [compose(h, u) for u in reps for h in elems]
        return elems


def enumerate_group(bsgs: BSGS, cap: int = 1_000_000) -> PArray:
    """Every group element as an image string, in deterministic order."""
    elems = bsgs.subgroup_elements(0, cap)
    assert len(elems) == bsgs.order()
    return PArray(elems, n=bsgs.n, validate=False)


def pointwise_stabilizer(bsgs: BSGS, points: Sequence[int]) -> BSGS:
    """BSGS of the subgroup fixing every listed point."""
    shifted = BSGS(bsgs.n, bsgs.strong_gens, base_prefix=tuple(points))
    kept = [g for g in shifted.strong_gens if all(g[p] == p for p in points)]
    return BSGS(bsgs.n, kept)


@dataclass(frozen=True)
class StructureProbe:
    order: int
    abelian: bool
    exponent: int
    involutions: int

    @property
    def elementary_abelian_2(self) -> bool:
        return self.abelian and self.exponent <= 2


def probe_elements(elems: Sequence[Sequence[int]]) -> StructureProbe:
    elems = [tuple(e) for e in elems]
    ident = identity(len(elems[0]))
    assert ident in elems
    exponent = 1
    involutions = 0
    for g in elems:
        orders = cycle_type(g)
        o = lcm(*orders)
        exponent = lcm(exponent, o)
        if o == 2:
            involutions += 1
    abelian = all(
        compose(a, b) == compose(b, a) for a, b in combinations(elems, 2)
    )
    return StructureProbe(len(elems), abelian, exponent, involutions)


def structure_probe(bsgs: BSGS, cap: int = 10_000) -> StructureProbe:
    """Order, commutativity, exponent and involution count of a small group."""
    if bsgs.order() > cap:
        raise OrderExceedsProbeCap(f"order {bsgs.order()} exceeds probe cap {cap}")
    return probe_elements(bsgs.subgroup_elements(0, cap))


# -- Mathieu groups ----------------------------------------------------------------

# degree -> (order, transitivity degree, sharply transitive)
_MATHIEU_PROFILE = {
    11: (7920, 4, True),
    12: (95040, 5, True),
    22: (443_520, 3, False),
    23: (10_200_960, 4, False),
    24: (244_823_040, 5, False),
}

_mathieu_cache: dict[int, BSGS] = {}


def load_mathieu_generators(n: int, path: Optional[str] = None) -> list[tuple[int, ...]]:
    """Generators for the degree-n Mathieu group, embedded or from a file.

    An override file holds one generator per line in 1-based cycle notation;
    the embedded resource is sectioned by "group <name> degree <n>" headers.
    """
    if path is not None:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh]
        gens = [parse_cycles(ln, n) for ln in lines if ln and not ln.startswith("#")]
        if not gens:
            raise ParseError(f"no generators found in {path}")
        return gens
    if n not in _MATHIEU_PROFILE:
        raise UnsupportedDegree(f"no embedded Mathieu group of degree {n}")
    text = resources.files("permcontract").joinpath("data/mathieu-gens.txt").read_text()
    gens: list[tuple[int, ...]] = []
    in_section = False
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if ln.startswith("group "):
            toks = ln.split()
            in_section = toks[1] == f"M{n}" and int(toks[3]) == n
            continue
        if in_section:
            gens.append(parse_cycles(ln, n))
    if not gens:
        raise ParseError(f"embedded resource has no section for degree {n}")
    return gens


def mathieu(n: int, gens_path: Optional[str] = None) -> BSGS:
    """Validated BSGS for M11, M12, M22, M23 or M24.

    The base is forced to start 0, 1, ..., t-1 where t is the transitivity
    degree, so orbit sizes certify t-transitivity and the first base levels
    line up for stabilizer work.  Order and orbit profile are checked on
    every load; BadGenerators means the generator source is wrong.
    """
    if n not in _MATHIEU_PROFILE:
        raise UnsupportedDegree(f"degree {n} is not one of 11, 12, 22, 23, 24")
    if gens_path is None and n in _mathieu_cache:
        return _mathieu_cache[n]
    order, t, sharp = _MATHIEU_PROFILE[n]
    gens = load_mathieu_generators(n, gens_path)
    bsgs = BSGS(n, gens, base_prefix=tuple(range(t)))
    if bsgs.order() != order:
        raise BadGenerators(f"degree {n}: got order {bsgs.order()}, expected {order}")
    sizes = bsgs.orbit_sizes()
    expected = tuple(n - k for k in range(t))
    if sizes[:t] != expected:
        raise BadGenerators(f"degree {n}: orbit profile {sizes} is not {t}-transitive")
    if sharp and len(bsgs.base) != t:
        raise BadGenerators(f"degree {n}: expected sharply {t}-transitive")
    if gens_path is None:
        _mathieu_cache[n] = bsgs
    return bsgs


# -- octad census -------------------------------------------------------------------


@dataclass(frozen=True)
class OctadCensus:
    histogram: dict[int, int]
    octads: tuple[tuple[int, ...], ...]
    probes: tuple[StructureProbe, ...]
    reference_octad: tuple[int, ...]
    reference_is_octad: bool

    @property
    def octad_count(self) -> int:
        return len(self.octads)


# the 8-set reported by one published computation, 0-indexed; whether it is an
# octad depends on the generator labelling, so it is reported, not asserted
REFERENCE_OCTAD = (0, 1, 2, 3, 4, 7, 10, 12)


def octad_scan(m24: BSGS, probe_count: int = 6, seed: int = 0) -> OctadCensus:
    """Pointwise stabilizer orders of all C(24,8) 8-subsets of the M24 points.

    Decomposes each 8-set into its 5 smallest points plus 3 more.  One traced
    element h sends the base prefix 0..4 to the 5-prefix, conjugating the
    order-48 prefix stabilizer H; the 8-set stabilizer order is then the count
    of H elements fixing the three preimages, read off 48-bit fix masks.
    """
    if m24.base[:5] != [0, 1, 2, 3, 4]:
        raise ValueError("octad scan needs a base starting 0,1,2,3,4")
    h5 = m24.subgroup_elements(from_level=5)
    assert len(h5) == 48
    fix_bits = [0] * m24.n
    for fi, f in enumerate(h5):
        for x in range(m24.n):
            if f[x] == x:
                fix_bits[x] |= 1 << fi
    hist: Counter[int] = Counter()
    octads: list[tuple[int, ...]] = []
    for prefix in combinations(range(24), 5):
        h = m24.transversal_trace(prefix)
        hinv = inverse(h)
        tail = range(prefix[4] + 1, 24)
        masks = [fix_bits[hinv[t]] for t in tail]
        for k5, k6, k7 in combinations(range(len(masks)), 3):
            cnt = (masks[k5] & masks[k6] & masks[k7]).bit_count()
            hist[cnt] += 1
            if cnt == 16:
                octads.append(prefix + (tail[k5], tail[k6], tail[k7]))
    octad_set = {frozenset(o) for o in octads}
    picks = splitmix64_stream(seed, probe_count)
    probes = []
    for raw in picks:
        oct_pts = octads[int(raw % np.uint64(len(octads)))]
        h = m24.transversal_trace(oct_pts[:5])
        hinv = inverse(h)
        pre = [hinv[t] for t in oct_pts[5:]]
        stab = [
            compose(compose(hinv, f), h)
            for f in h5
            if all(f[u] == u for u in pre)
        ]
        assert all(all(g[x] == x for x in oct_pts) for g in stab)
        probes.append(probe_elements(stab))
    return OctadCensus(
        histogram=dict(sorted(hist.items())),
        octads=tuple(octads),
        probes=tuple(probes),
        reference_octad=REFERENCE_OCTAD,
        reference_is_octad=frozenset(REFERENCE_OCTAD) in octad_set,
    )


# -- seeded element sampling ----------------------------------------------------------


@dataclass(frozen=True)
class FixedPointSample:
    max_fixed_points: int
    samples: int
    identity_hits: int
    seed: int


def sample_max_fixed_points(bsgs: BSGS, samples: int = 1_000_000, seed: int = 0) -> FixedPointSample:
    """Max fixed-point count over seeded random non-identity elements.

    Elements are drawn uniformly via one transversal pick per level, folded
    with vectorized composition; identity draws are counted and excluded.
    """
    levels = [
        np.array([tr[beta] for beta in sorted(tr)], dtype=np.uint8)
        for tr in bsgs._tr
    ]
    n = bsgs.n
    arange = np.arange(n, dtype=np.uint8)
    best = 0
    identity_hits = 0
    done = 0
    chunk = 1 << 15
    offset = 0
    while done < samples:
        take = min(chunk, samples - done)
        cur = None
        for li in reversed(range(len(levels))):
            u = levels[li]
            if len(u) == 1:
                rows = np.broadcast_to(u[0], (take, n))
            else:
                idx = splitmix64_stream(seed + 0x9E3779B9 * (li + 1), take, offset)
                rows = u[(idx % np.uint64(len(u))).astype(np.int64)]
            cur = rows if cur is None else np.take_along_axis(rows, cur.astype(np.intp), axis=1)
        fp = (cur == arange).sum(axis=1)
        ident_mask = fp == n
        identity_hits += int(ident_mask.sum())
        if (~ident_mask).any():
            best = max(best, int(fp[~ident_mask].max()))
        done += take
        offset += take
    return FixedPointSample(best, samples, identity_hits, seed)
