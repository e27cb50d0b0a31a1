import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from hm2rbm.covering import (
    CSV_HEADER, CoverPlan, EdgePair, StarTuple, assign_leaves, cover_sets,
    covering_number_bound, d_bounds, emit_tables, erdos_spencer_bound, exact_covering_design,
    exact_covering_number, greedy_layer_cover, make_cover_plan,
    pairwise_hidden_count, param_lower_bound, prev_bound, schonheim_bound, simple_bound,
    tables_csv, u_bound)
from hm2rbm.errors import InputError
from hm2rbm.subsetpoly import (
    downward_closure, full_complex, k_interaction_complex, layer, members, size, varset)

import oracles


def brute_covering_number(v, k, r):
    blocks = list(itertools.combinations(range(v), k))
    targets = [frozenset(t) for t in itertools.combinations(range(v), r)]
    for n in range(1, len(blocks) + 1):
        for fam in itertools.combinations(blocks, n):
            got = set()
            for b in fam:
                got.update(frozenset(t) for t in itertools.combinations(b, r))
            if all(t in got for t in targets):
                return n


@pytest.mark.parametrize("v,k", [(4, 3), (5, 3), (5, 4), (6, 5), (6, 4)])
def test_exact_search_matches_brute_force(v, k):
    assert exact_covering_number(v, k, k - 1).value == brute_covering_number(v, k, k - 1)


def test_exact_search_known_values():
    assert exact_covering_number(6, 4, 3).value == 6
    assert exact_covering_number(7, 4, 3).value == 12
    assert exact_covering_number(7, 3, 2).value == 7
    d = exact_covering_design(7, 4, 3)
    got = set()
    for b in d:
        got.update(varset(t) for t in itertools.combinations(members(b), 3))
    assert got == set(layer(7, 3))


def test_exact_search_budget_and_args():
    assert exact_covering_design(8, 5, 4, node_budget=1000) is None
    with pytest.raises(InputError):
        exact_covering_design(10, 5, 4)
    with pytest.raises(InputError):
        exact_covering_design(6, 4, 2)


def test_closed_form_rows():
    for v in range(2, 15):
        assert covering_number_bound(v, 2).value == v - 1
        assert covering_number_bound(v, v).value == 1
        assert covering_number_bound(v, v - 1).value == math.ceil(v / 2)
    assert covering_number_bound(6, 3).value == 6
    assert covering_number_bound(7, 5).value == 7
    assert covering_number_bound(9, 7).value == 12


def test_closed_forms_agree_with_exact_search():
    for v in range(3, 8):
        for j in range(2, v + 1):
            b = covering_number_bound(v, j)
            if b.method != "exact-formula":
                continue
            ex = exact_covering_number(v, v - j + 1, v - j)
            assert ex is not None and ex.value == b.value, (v, j)


def test_upper_bounds_dominate_lower_bound():
    for v in range(3, 15):
        for j in range(2, v + 1):
            b = covering_number_bound(v, j).value
            assert b >= schonheim_bound(v, v - j + 1, v - j)
            assert b <= simple_bound(v, j) == math.comb(v - 1, j - 1)


def test_erdos_spencer_shape():
    # floor(C(v, j) / j * (1 + ln j)) for the 4-subsets of 7
    assert erdos_spencer_bound(7, 4) == math.floor(35 / 4 * (1 + math.log(4)))


@pytest.mark.parametrize("v", range(2, 10))
def test_greedy_layer_cover_valid_and_small(v):
    for j in range(2, v + 1):
        tuples = greedy_layer_cover(v, j)
        pairs = [(members(t.root), members(t.leaves)) for t in tuples]
        assert oracles.covers_layer(v, j, pairs)
        assert len(tuples) <= covering_number_bound(v, j).value


def test_cover_sets_partial():
    needed = [varset(s) for s in [(0, 1), (1, 2)]]
    tuples = cover_sets(4, 2, needed)
    assert len(tuples) == 1
    assert set(tuples[0].covered()) == set(needed)


def test_assign_leaves_lex_smallest_root():
    roots = [varset([1]), varset([0])]
    tuples = assign_leaves(roots, [varset([0, 1])])
    assert tuples == [StarTuple(varset([0]), varset([1]))]


def test_plan_validation():
    a = StarTuple(varset([0, 1]), varset([2]))
    b = StarTuple(varset([0]), varset([1]))
    CoverPlan(3, (a, b))
    with pytest.raises(InputError):
        CoverPlan(3, (b, a))  # degree order
    with pytest.raises(InputError):
        CoverPlan(3, (b, StarTuple(varset([1]), varset([0]))))  # covered twice
    with pytest.raises(InputError):
        # second root {0,1} is disturbed although covered by the first group
        CoverPlan(3, (StarTuple(varset([0]), varset([1])),
                      StarTuple(varset([1]), varset([0]))))


def test_make_cover_plan_examples():
    assert len(make_cover_plan(full_complex(3))) == 3
    assert len(make_cover_plan(full_complex(4))) == 6
    assert len(make_cover_plan(k_interaction_complex(3, 2))) == 2
    assert len(make_cover_plan(full_complex(6))) == 21
    assert len(make_cover_plan(k_interaction_complex(5, 1))) == 0
    # visible pair interactions leave the 4-set and the triples: 1 + 2
    assert len(make_cover_plan(full_complex(4), k_interaction_complex(4, 2))) == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.lists(st.integers(0, 127), max_size=6), st.booleans())
def test_plan_covers_complex(v, gens, edge_pairs):
    S = downward_closure(v, [g & ((1 << v) - 1) for g in gens])
    plan = make_cover_plan(S, edge_pairs=edge_pairs)
    need = {s for s in S if size(s) >= 2}
    assert plan.covered() >= need
    # plan sizes never exceed the per-layer bounds
    if not edge_pairs:
        for j in range(2, v + 1):
            n_j = sum(1 for g in plan if g.degree == j)
            assert n_j <= covering_number_bound(v, j).value


def test_edge_pair_plan_uses_fewer_units():
    plain = make_cover_plan(full_complex(5))
    paired = make_cover_plan(full_complex(5), edge_pairs=True)
    assert any(isinstance(g, EdgePair) for g in paired)
    assert len(paired) <= len(plain)


def test_table_k3_row_and_k2_row():
    rows = {(r.v, r.k): r for r in emit_tables(14)}
    assert [rows[(v, 3)].u_bound for v in range(3, 15)] == \
        [3, 5, 8, 11, 15, 19, 24, 29, 35, 41, 48, 55]
    assert all(rows[(v, 2)].u_bound == v - 1 for v in range(2, 15))


def test_u_bound_full():
    assert [u_bound(v, v) for v in (2, 3, 4, 5, 6)] == [1, 3, 6, 12, 21]
    assert u_bound(7, 7) == 47
    assert u_bound(7, 7, use_oracle=True) == 39


def test_param_lower_bound_column():
    got = [param_lower_bound(v) for v in (2, 4, 10, 20, 30, 40)]
    assert got == [1, 3, 93, 49932, 34636833, 26817356775]


def test_prev_and_pairwise_counts():
    assert prev_bound(4) == 7
    assert prev_bound(5) == 15
    assert pairwise_hidden_count(4, 3) == u_bound(4, 3) - u_bound(4, 2)


def test_tables_csv_header():
    text = tables_csv(emit_tables(3))
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 3  # (2,2), (3,2), (3,3)
    with pytest.raises(InputError):
        emit_tables(41)


def test_d_bounds_methods():
    b = d_bounds(7, 7)
    assert b[4].method in ("erdos-spencer", "simple", "min-combine")
    assert d_bounds(7, 7, use_oracle=True)[4].method == "exact-search"
