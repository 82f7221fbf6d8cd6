"""Acceptance gate: one test per stated criterion, at stated tolerance.

Run with -v for one pass/fail line per criterion.  Time budgets are part
of the criteria and asserted with the stated limits; randomized steps use
fixed seeds and fixed kick counts so every number here is reproducible.
"""

import time
from math import comb, log

import pytest

from permcontract.cgraph import agl_graph, components, verify_pgl_structure
from permcontract.gf import Field, residue_identity_report, split_prime_power
from permcontract.groups import mathieu, pointwise_stabilizer, structure_probe, octad_scan
from permcontract.indep import (
    PUBLISHED_K,
    IndepSet,
    lift_to_pgl,
    mathieu_contract,
    p1_exact,
    p1_greedy,
    pgl_bound_array,
    project_bound,
)

AGL_Q = [(7, 1), (13, 1), (19, 1), (5, 2), (31, 1), (2, 4), (2, 6)]

# deterministic search effort per table row: (use_exact, kicks)
ROW_POLICY = {7: (True, 0), 13: (True, 0), 19: (False, 2_000), 31: (False, 10_000), 37: (False, 10_000)}

_rows: dict[int, tuple[int, int, bool, float]] = {}


def _table_row(q: int) -> tuple[int, int, bool, float]:
    """(k, verified lifted bound, optimal, runtime) for one row, memoized."""
    if q in _rows:
        return _rows[q]
    t0 = time.perf_counter()
    field = Field(*split_prime_power(q))
    use_exact, kicks = ROW_POLICY[q]
    if use_exact:
        iset = p1_exact(field, seed=0)
    else:
        iset = p1_greedy(field, seed=0, kicks=kicks)
    bound = pgl_bound_array(field, iset)
    assert bound.size == (q - 1) * (iset.size + q)
    assert bound.min_hd >= q - 3
    _rows[q] = (iset.size, bound.size, bool(iset.optimal), time.perf_counter() - t0)
    return _rows[q]


def test_criterion_1_agl_array_sizes_and_distances():
    t0 = time.perf_counter()
    from permcontract.indep import agl_bound_array

    for p, m in AGL_Q:
        field = Field(p, m)
        q = field.q
        b = agl_bound_array(field)
        expected = (q * q - 1) // 2 if q % 2 else (q - 1) * (q + 2) // 3
        assert b.size == expected, f"q={q}: size {b.size} != {expected}"
        assert b.min_hd >= q - 3, f"q={q}: hd {b.min_hd}"
        assert "sampled" not in b.method
    assert time.perf_counter() - t0 < 10.0


def test_criterion_2_agl_component_census():
    t0 = time.perf_counter()
    for p, m in AGL_Q:
        field = Field(p, m)
        q = field.q
        rep = components(agl_graph(field))
        assert rep.isolated == q - 1, f"q={q}"
        assert rep.other == (), f"q={q}: unexpected components"
        length = 6 if q % 2 else 3
        assert rep.cycles == {length: (q - 1) ** 2 // length}, f"q={q}"
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.parametrize("p,m", [(13, 1), (5, 2)])
def test_criterion_3_pgl_structure_checks(p, m):
    t0 = time.perf_counter()
    field = Field(p, m)
    q = field.q
    rep = verify_pgl_structure(field)
    assert rep.ok() and rep.guaranteed
    assert rep.degree_regular and rep.level_matchings
    assert rep.neighborhoods_two_regular and rep.connected
    assert rep.phi_preserves_edges and rep.census_ok
    assert rep.isolated == q * (q - 1)
    assert rep.nontrivial_components == q - 1
    assert time.perf_counter() - t0 < 60.0


def test_criterion_4_table_rows_vs_published():
    # q=7: the exact solver must close; published k=13 reproduces via a
    # 13-subset (the true maximum is 14, so found > published is correct)
    k7, bound7, optimal7, rt7 = _table_row(7)
    assert optimal7 and k7 == 14 >= PUBLISHED_K[7]
    assert bound7 == 126
    field7 = Field(7)
    full = p1_exact(field7, seed=0)
    sub = IndepSet(full.vertices[:13], method="published-size-subset", graph=full.graph)
    lifted13, arr13 = lift_to_pgl(field7, sub)
    assert lifted13.size == 120 and len(arr13) == 120

    k13, bound13, _, rt13 = _table_row(13)
    assert k13 >= 33 and bound13 >= 552
    assert rt7 + rt13 < 600.0

    for q, floor in ((19, 73), (31, 110), (37, 172)):
        k, bound, _, rt = _table_row(q)
        assert k >= floor >= 0.9 * PUBLISHED_K[q], f"q={q}: k={k} < {floor}"
        assert rt < 600.0, f"q={q} took {rt:.0f}s"


def test_criterion_5_mathieu_orders():
    t0 = time.perf_counter()
    expected = {11: 7920, 12: 95040, 22: 443520, 23: 10200960, 24: 244823040}
    for n, order in expected.items():
        assert mathieu(n).order() == order, f"M{n}"
    assert time.perf_counter() - t0 < 5.0


def test_criterion_6_m12_contraction_full_sampled_projected():
    t0 = time.perf_counter()
    full = mathieu_contract(12, mode="full")
    assert full.size == 95040
    assert full.min_hd == 6  # the minimum is attained, not just bounded
    assert full.describe() == "M(11,6) >= 95040"
    sampled = mathieu_contract(12, mode="sampled", pairs=10_000_000, seed=0)
    assert sampled.min_hd >= 6
    proj = project_bound(full)
    assert proj.describe() == "M(10,6) >= 8640"
    assert proj.min_hd >= 6
    assert time.perf_counter() - t0 < 1800.0


def test_criterion_7_m24_structural_certification():
    t0 = time.perf_counter()
    census = octad_scan(mathieu(24), probe_count=6, seed=0)
    assert census.histogram == {1: 734712, 16: 759}
    assert sum(census.histogram.values()) == comb(24, 8)
    assert census.octad_count == 759 == comb(24, 5) // comb(8, 5)
    assert all(order % 3 != 0 for order in census.histogram)
    assert all(pr.order == 16 and pr.elementary_abelian_2 for pr in census.probes)
    stab = structure_probe(pointwise_stabilizer(mathieu(12), [0, 1, 2, 3]))
    assert (stab.order, stab.abelian, stab.involutions, stab.exponent) == (8, False, 1, 4)
    assert time.perf_counter() - t0 < 3600.0


def test_criterion_8_residue_identity_suite():
    t0 = time.perf_counter()
    report = residue_identity_report()
    assert report["reciprocity"] == (True, 276)
    assert report["residue_dichotomy"][0] and report["residue_dichotomy"][1] >= 90
    assert report["unit_quadratic_dichotomy"] == (True, 12)
    assert time.perf_counter() - t0 < 5.0


def test_criterion_9_bound_identity_and_growth():
    qs = sorted(ROW_POLICY)
    ratios = []
    for q in qs:
        k, bound, _, _ = _table_row(q)
        assert bound == (q - 1) * (k + q), f"q={q}"
        ratios.append((log(q), bound / q**2))
    for (lg_a, ra), (lg_b, rb) in zip(ratios, ratios[1:]):
        assert lg_a < lg_b
        assert ra <= rb, f"bound/q^2 fell from {ra:.3f} to {rb:.3f}"
