"""Contraction graph builders, censuses, and structure verification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permcontract.cgraph import (
    BadResidue,
    CGraph,
    ComponentReport,
    GeneratorIsUnitRoot,
    IsolatedVertex,
    NotAGenerator,
    StructureViolation,
    agl_graph,
    agl_neighbors,
    build_graph,
    components,
    is_contraction_edge,
    level_zero_partition,
    path_coeffs,
    pform_grid,
    pgl_graph,
    verify_pgl_structure,
)
from permcontract.gf import EvenCharacteristic, Field, solve_unit_quadratic
from permcontract.groups import ZeroR, agl_enumerate, agl_labels, p_form_perm
from permcontract.perm import MismatchedN, PArray, contract_full, hd, identity


def _pairwise_hd(rows: list[tuple[int, ...]]) -> np.ndarray:
    mat = np.array(rows, dtype=np.uint8)
    return (mat[:, None, :] != mat[None, :, :]).sum(axis=2)


def test_edge_predicate_frozen_examples():
    f = Field(7)
    arr = agl_enumerate(f)
    labels = agl_labels(f)
    idx = {lab: k for k, lab in enumerate(labels)}
    shift = arr[idx[(1, 1)]]  # x + 1
    nbr1, nbr2 = agl_neighbors(f, 1, 1)
    assert (nbr1, nbr2) == ((2, 4), (4, 1))
    assert is_contraction_edge(shift, arr[idx[nbr1]])
    assert is_contraction_edge(shift, arr[idx[nbr2]])
    ident = arr[idx[(1, 0)]]
    assert all(not is_contraction_edge(ident, row) for row in arr.rows())
    assert not is_contraction_edge(shift, shift)
    with pytest.raises(MismatchedN):
        is_contraction_edge(shift, identity(6))


@settings(max_examples=300, deadline=None)
@given(st.data(), st.integers(5, 9))
def test_edge_predicate_equals_distance_drop(data, n):
    p = tuple(data.draw(st.permutations(range(n))))
    s = tuple(data.draw(st.permutations(range(n))))
    dropped = hd(contract_full(p), contract_full(s)) == hd(p, s) - 3
    assert is_contraction_edge(p, s) == dropped


@pytest.mark.parametrize("p,m", [(7, 1), (13, 1), (2, 4)])
def test_agl_edges_exhaustive_against_drop(p, m):
    f = Field(p, m)
    q = f.q
    arr = agl_enumerate(f)
    rows = list(arr.rows())
    hd_orig = _pairwise_hd(rows)
    hd_cont = _pairwise_hd([contract_full(r) for r in rows])
    g = agl_graph(f, validate=True)  # closed form vs brute force
    t1, t2 = solve_unit_quadratic(f)
    labels = agl_labels(f)
    for u in range(len(rows)):
        for v in range(u + 1, len(rows)):
            has = g.has_edge(u, v)
            assert has == (hd_cont[u, v] == hd_orig[u, v] - 3)
            if has:
                assert hd_orig[u, v] == q - 1
                assert hd_cont[u, v] == q - 4
                ratio = f.div(labels[u][0], labels[v][0])
                assert ratio in (t1, t2)


@pytest.mark.parametrize(
    "p,m,isolated,cyc_len,cyc_count",
    [(7, 1, 6, 6, 6), (13, 1, 12, 6, 24), (2, 4, 15, 3, 75), (19, 1, 18, 6, 54)],
)
def test_agl_component_census(p, m, isolated, cyc_len, cyc_count):
    f = Field(p, m)
    rep = components(agl_graph(f, validate=f.q <= 16))
    assert rep.isolated == isolated
    assert rep.cycles == {cyc_len: cyc_count}
    assert rep.other == ()
    assert rep.n_vertices == f.q * (f.q - 1)


def test_agl_errors():
    with pytest.raises(BadResidue):
        agl_graph(Field(11))
    with pytest.raises(IsolatedVertex):
        agl_neighbors(Field(7), 1, 0)  # identity fixes the last symbol


def test_build_graph_trivial_and_container():
    arr = PArray([identity(5)])
    g = build_graph(arr)
    assert g.edge_count == 0 and g.n_vertices == 1
    with pytest.raises(ValueError):
        CGraph.from_edges(3, [(1, 1)])
    g2 = CGraph.from_edges(4, [(0, 1), (1, 2), (0, 1)])
    assert g2.edge_count == 2
    assert g2.neighbors(1) == (0, 2)
    assert g2.first_conflict([0, 2, 3]) is None
    assert g2.first_conflict([0, 1, 3]) == (0, 1)


def test_pform_grid_frozen_edges():
    f = Field(7)
    g = pform_grid(f, 1)
    q = 7
    assert g.n_vertices == 49
    assert g.has_edge(0 * q + 0, 1 * q + 1)  # (1-0)(1-0) = 1
    assert not g.has_edge(0 * q + 0, 0 * q + 3)  # same level
    assert g.has_edge(0 * q + 0, 2 * q + 4)  # (4-0)(2-0) = 8 = 1
    with pytest.raises(EvenCharacteristic):
        pform_grid(Field(2, 2), 1)
    with pytest.raises(ZeroR):
        pform_grid(f, 0)


@pytest.mark.parametrize("p,m", [(13, 1), (5, 2)])
def test_pform_grid_edges_exhaustive_against_drop(p, m):
    f = Field(p, m)
    q = f.q
    g = pform_grid(f, 1)
    rows = [p_form_perm(f, a, 1, i) for (i, a) in g.labels]
    hd_orig = _pairwise_hd(rows)
    hd_cont = _pairwise_hd([contract_full(r) for r in rows])
    adj = np.zeros((q * q, q * q), dtype=bool)
    for u, v in g.edges():
        adj[u, v] = adj[v, u] = True
    dropped = hd_cont == hd_orig - 3
    np.fill_diagonal(dropped, False)
    assert np.array_equal(adj, dropped)
    assert (hd_orig[adj] == q - 1).all()


def test_pgl_graph_alignment_and_validation():
    f = Field(7)
    g = pgl_graph(f, validate=True)  # brute-force comparison
    assert g.n_vertices == 8 * 7 * 6
    rep = components(g)
    assert rep.isolated == 42
    assert len(rep.other) == 6
    assert all(len(c) == 49 for c in rep.other)
    assert rep.cycles == {}


def test_pgl_census_q13():
    rep = components(pgl_graph(Field(13)))  # default validates at q <= 13
    assert rep.isolated == 13 * 12
    assert len(rep.other) == 12
    assert all(len(c) == 169 for c in rep.other)


def test_verify_structure_q13():
    rep = verify_pgl_structure(Field(13))
    assert rep.ok() and rep.guaranteed
    assert rep.isolated == 156 and rep.nontrivial_components == 12
    assert rep.degree_regular and rep.level_matchings
    assert rep.neighborhoods_two_regular and rep.connected
    assert rep.phi_preserves_edges and rep.census_ok


def test_verify_structure_observational_and_errors():
    rep = verify_pgl_structure(Field(7))
    assert rep.ok() and not rep.guaranteed
    with pytest.raises(BadResidue):
        verify_pgl_structure(Field(11))
    with pytest.raises(EvenCharacteristic):
        verify_pgl_structure(Field(2, 4))


def test_path_coeffs_q13():
    f = Field(13)
    pc = path_coeffs(f)
    assert pc.g == 2
    assert pc.alpha[0] == f.inv(2) == 7
    assert pc.beta[0] == 0
    assert pc.distinct_level0
    assert len(pc.alpha) == len(pc.beta) == 12
    # path vertices really are adjacent in the grid
    g = pform_grid(f, 1)
    q = 13
    prev = 0 * q + 0
    power = 1
    for k in range(1, q):
        power = f.mul(power, pc.g)
        vid = power * q + pc.alpha[k - 1]
        assert g.has_edge(prev, vid)
        assert g.has_edge(vid, 0 * q + pc.beta[k - 1])
        prev = vid


def test_path_coeffs_generator_handling():
    f7 = Field(7)
    with pytest.raises(GeneratorIsUnitRoot):
        path_coeffs(f7, strict=True)
    pc = path_coeffs(f7, strict=False)
    assert pc.g == 3 and pc.alpha[0] == 5
    assert not pc.distinct_level0
    with pytest.raises(NotAGenerator):
        path_coeffs(Field(13), g=3)  # 3 has order 3 mod 13
    with pytest.raises(GeneratorIsUnitRoot):
        # 3 generates GF(7)* and is a root of x^2 - x + 1 there
        path_coeffs(f7, g=3, strict=True)
    pc11 = path_coeffs(Field(13), g=11)  # generator, not a unit root
    assert pc11.g == 11 and pc11.distinct_level0
    pc25 = path_coeffs(Field(5, 2))
    assert pc25.distinct_level0 and len(pc25.alpha) == 24


def test_level_zero_partition_q13():
    rep = level_zero_partition(Field(13))
    assert rep.is_partition
    assert len(rep.path_block) == 13 * 12
    assert len(rep.star_block) == 13
    assert rep.path_connected and rep.star_connected
    # the star spans the hub plus one vertex per nonzero level
    levels = sorted(v // 13 for v in rep.star_block)
    assert levels == sorted(set(range(13)))


def test_components_classification():
    edgeless = CGraph.from_edges(4, [])
    rep = components(edgeless)
    assert rep.isolated == 4 and not rep.cycles and not rep.other
    path3 = CGraph.from_edges(3, [(0, 1), (1, 2)])
    rep = components(path3)
    assert rep.other == ((0, 1, 2),)
    square = CGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    rep = components(square)
    assert rep.cycles == {4: 1}
    assert (
        rep.to_json()
        == '{"cycles": {"4": 1}, "isolated": 0, "other": []}'
    )
    with pytest.raises(ValueError):
        ComponentReport(5, 1, {3: 1}, ())


def test_write_edges(tmp_path):
    g = CGraph.from_edges(4, [(2, 3), (0, 2), (0, 1)])
    out = tmp_path / "edges.csv"
    g.write_edges(str(out))
    assert out.read_text() == "0,1\n0,2\n2,3\n"
