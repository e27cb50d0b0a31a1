import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hm2rbm.errors import InputError
from hm2rbm.subsetpoly import (
    FunctionTable, MultilinearPoly, SimplicialComplex, downward_closure, full_complex,
    k_interaction_complex, layer, members, mobius_dense, mobius_transform, naive_mobius,
    naive_zeta, singletons_complex, size, subsets, varset, zeta_dense, zeta_transform)

import oracles


def test_varset_roundtrip():
    assert varset([0, 2]) == 5
    assert members(5) == (0, 2)
    assert size(0b1011) == 3
    with pytest.raises(InputError):
        varset([-1])


def test_subsets_enumeration():
    assert list(subsets(0b101)) == [0, 1, 4, 5]
    assert list(subsets(0)) == [0]


def test_zeta_example_v2():
    # E = 1 + 2 x0 + 3 x1 + 4 x0 x1
    p = MultilinearPoly(2, {0: 1.0, 1: 2.0, 2: 3.0, 3: 4.0})
    assert zeta_transform(p).values.tolist() == [1.0, 3.0, 4.0, 10.0]


def test_mobius_of_and():
    t = FunctionTable(2, [0.0, 0.0, 0.0, 1.0])
    assert mobius_transform(t).coeffs == {3: 1.0}


def test_zeta_matches_naive_oracle():
    rng = np.random.default_rng(1)
    for v in range(0, 7):
        coeffs = rng.normal(size=1 << v)
        p = MultilinearPoly.from_dense(v, coeffs)
        inter = list(p.coeffs.items())
        assert np.allclose(zeta_transform(p).values, oracles.energy_naive(v, inter),
                           atol=1e-12)
        assert np.allclose(naive_zeta(p), oracles.energy_naive(v, inter), atol=1e-12)


def test_mobius_matches_naive():
    rng = np.random.default_rng(2)
    for v in range(0, 7):
        vals = rng.normal(size=1 << v)
        fast = mobius_dense(vals, v)
        assert np.allclose(fast, naive_mobius(vals, v), atol=1e-12)
        for B in range(1 << v):
            assert math.isclose(fast[B], oracles.coefficient_naive(vals, v, B),
                                abs_tol=1e-12)


def test_batched_transform():
    rng = np.random.default_rng(3)
    arr = rng.normal(size=(4, 3, 1 << 5))
    out = zeta_dense(arr, 5)
    assert out.shape == arr.shape
    assert np.allclose(out[2, 1], zeta_dense(arr[2, 1], 5))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_mobius_zeta_inverse(v, seed):
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-100, 100, size=1 << v)
    assert np.max(np.abs(zeta_dense(mobius_dense(vals, v), v) - vals)) <= 1e-9
    assert np.max(np.abs(mobius_dense(zeta_dense(vals, v), v) - vals)) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_transform_linearity(v, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(2, 1 << v))
    s = rng.normal()
    assert np.allclose(mobius_dense(a + s * b, v),
                       mobius_dense(a, v) + s * mobius_dense(b, v), atol=1e-12)


def test_function_table_validation():
    with pytest.raises(InputError):
        FunctionTable(2, [0.0, 1.0, 2.0])
    with pytest.raises(InputError):
        FunctionTable(1, [0.0, float("nan")])
    t = FunctionTable(1, [0.0, 1.0])
    with pytest.raises(ValueError):
        t.values[0] = 3.0


def test_poly_arithmetic_and_degree():
    p = MultilinearPoly(3, {1: 1.0, 7: 2.0})
    q = MultilinearPoly(3, {7: -2.0})
    assert (p + q)[7] == 0.0
    assert (p + q).degree() == 1
    assert (p - q)[7] == 4.0
    assert p.scale(0.5)[1] == 0.5
    with pytest.raises(InputError):
        MultilinearPoly(2, {4: 1.0})
    with pytest.raises(InputError):
        p + MultilinearPoly(2, {})


def test_layer_order_and_counts():
    assert layer(4, 2) == [3, 5, 6, 9, 10, 12]
    for v in range(6):
        for j in range(v + 1):
            assert len(layer(v, j)) == math.comb(v, j)


def test_complex_validation():
    with pytest.raises(InputError):
        SimplicialComplex(2, frozenset({0, 1, 2, 3, 5}))
    with pytest.raises(InputError):
        SimplicialComplex(2, frozenset({0, 1, 3}))  # {1} missing
    with pytest.raises(InputError):
        SimplicialComplex(2, frozenset({0, 1}))  # variable 1 unused


def test_downward_closure():
    S = downward_closure(3, [[0, 1], [1, 2]])
    assert set(S) == {0, 1, 2, 4, 3, 6}
    assert S.max_degree() == 2
    assert downward_closure(3, [7]).sets == full_complex(3).sets


def test_standard_complexes():
    assert len(full_complex(4)) == 16
    assert len(k_interaction_complex(4, 2)) == 11
    assert singletons_complex(3).layer(1) == [1, 2, 4]
