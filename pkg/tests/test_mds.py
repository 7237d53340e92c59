from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codedcomp.mds import (
    GeneratorError,
    GeneratorMatrix,
    PartitionedMatrix,
    decode,
    encode,
    kronecker_encode,
    make_generator,
    worked_example_generator,
)
from conftest import rel_err


def all_subsets_invertible(G, k):
    # independent of the library check: plain determinants
    return all(abs(np.linalg.det(G[list(I)])) > 1e-12 for I in combinations(range(G.shape[0]), k))


def test_square_generator_single_subset():
    G = make_generator(4, 4, seed=3)
    assert G.entries.shape == (4, 4)
    assert abs(np.linalg.det(G.entries)) > 0


def test_worked_example_all_subsets_invertible():
    G = worked_example_generator()
    assert G.is_mds()
    assert all_subsets_invertible(G.entries, 4)
    # two parity rows restricted to columns p < q give determinant q - p
    P = G.entries[4:]
    for p, q in combinations(range(4), 2):
        assert np.linalg.det(P[:, [p, q]]) == pytest.approx(q - p)


def test_seeded_generator_all_210_subsets():
    G = make_generator(10, 4, seed=7)
    assert sum(1 for _ in combinations(range(10), 4)) == 210
    assert all_subsets_invertible(G.entries, 4)


def test_generator_determinism_and_seed_sensitivity():
    assert make_generator(8, 3, 11) == make_generator(8, 3, 11)
    assert make_generator(8, 3, 11) != make_generator(8, 3, 12)


def test_generator_rejects_bad_shape():
    with pytest.raises(GeneratorError):
        make_generator(3, 4, 0)
    with pytest.raises(GeneratorError):
        make_generator(3, 0, 0)


def test_generator_gives_up_after_attempts(monkeypatch):
    import codedcomp.mds as mds

    monkeypatch.setattr(mds, "_min_singular_ratio", lambda e, s: 0.0)
    with pytest.raises(GeneratorError, match="100 attempts"):
        mds.make_generator(5, 2, 0)


def test_large_binomial_uses_sampled_check():
    G = make_generator(30, 10, seed=1)  # C(30,10) ~ 3e7 subsets
    assert G.min_singular_ratio() > 1e-9


def test_systematic_generator_top_identity():
    G = make_generator(7, 3, seed=5, systematic=True)
    np.testing.assert_array_equal(G.entries[:3], np.eye(3))
    assert all_subsets_invertible(G.entries, 3)


def test_generator_entries_read_only():
    G = make_generator(5, 2, 0)
    with pytest.raises(ValueError):
        G.entries[0, 0] = 1.0


def test_generator_json_round_trip():
    G = make_generator(6, 3, seed=9)
    G2 = GeneratorMatrix.from_json(G.to_json())
    assert G2 == G and G2.seed == 9
    assert '"entries"' in G.to_json() and '"L": 6' in G.to_json()


def test_encode_identity_is_partition(rng):
    A = PartitionedMatrix.from_matrix(rng.standard_normal((8, 3)), 4)
    coded = encode(A, GeneratorMatrix(np.eye(4)))
    np.testing.assert_array_equal(coded.blocks, A.blocks)


def test_worked_example_parity_blocks(rng):
    A = PartitionedMatrix.from_matrix(rng.standard_normal((8, 5)), 4)
    coded = encode(A, worked_example_generator())
    b = A.blocks
    np.testing.assert_allclose(coded[4], b[0] + b[1] + b[2] + b[3])
    np.testing.assert_allclose(coded[5], b[0] + 2 * b[1] + 3 * b[2] + 4 * b[3])


def test_encode_matches_dense_kronecker(rng):
    A = rng.standard_normal((8, 5))
    G = make_generator(6, 4, seed=2)
    got = encode(PartitionedMatrix.from_matrix(A, 4), G).blocks.reshape(12, 5)
    assert rel_err(got, kronecker_encode(A, G)) <= 1e-12


def test_encode_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        encode(PartitionedMatrix.from_matrix(rng.standard_normal((6, 2)), 3), make_generator(5, 2, 0))


def test_partition_round_trip_and_divisibility(rng):
    A = rng.standard_normal((12, 4))
    P = PartitionedMatrix.from_matrix(A, 3)
    assert (P.original_rows, P.original_cols, P.k) == (12, 4, 3)
    np.testing.assert_array_equal(P.to_matrix(), A)
    with pytest.raises(ValueError):
        PartitionedMatrix.from_matrix(A, 5)


def test_decode_systematic_is_concatenation(rng):
    G = make_generator(6, 3, 4, systematic=True)
    w = [rng.standard_normal(2) for _ in range(3)]
    np.testing.assert_allclose(decode(list(enumerate(w)), G), np.concatenate(w), rtol=0, atol=1e-15)


def _coded_products(A, x, G):
    coded = encode(PartitionedMatrix.from_matrix(A, G.cols), G)
    return [blk @ x for blk in coded.blocks]


def test_decode_worked_example_subset_0145(rng):
    A, x = rng.standard_normal((8, 5)), rng.standard_normal(5)
    G = worked_example_generator()
    w = _coded_products(A, x, G)
    y = decode([(i, w[i]) for i in (0, 1, 4, 5)], G)
    assert rel_err(y, A @ x) <= 1e-10


def test_decode_worked_example_all_15_subsets(rng):
    A, x = rng.standard_normal((8, 5)), rng.standard_normal(5)
    G = worked_example_generator()
    w = _coded_products(A, x, G)
    subsets = list(combinations(range(6), 4))
    assert len(subsets) == 15
    for I in subsets:
        assert rel_err(decode([(i, w[i]) for i in I], G), A @ x) <= 1e-10


def test_decode_errors(rng):
    G = worked_example_generator()
    w = [rng.standard_normal(2) for _ in range(6)]
    with pytest.raises(ValueError, match="exactly"):
        decode([(0, w[0]), (1, w[1])], G)
    with pytest.raises(ValueError, match="duplicate"):
        decode([(0, w[0]), (0, w[0]), (1, w[1]), (2, w[2])], G)
    with pytest.raises(ValueError):
        decode([(0, w[0]), (1, w[1]), (2, w[2]), (6, w[3])], G)
    bad = GeneratorMatrix(np.vstack([np.eye(2), [[1, 1], [2, 2]]]))
    with pytest.raises(GeneratorError):
        decode([(2, w[0]), (3, w[1])], bad)


@settings(max_examples=40)
@given(st.integers(1, 6), st.integers(0, 6), st.integers(1, 4), st.integers(1, 5), st.integers(0, 10_000))
def test_round_trip_every_subset(k, extra, rows, q, seed):
    gen = np.random.default_rng(seed)
    L = k + extra
    A = gen.standard_normal((k * rows, q))
    x = gen.standard_normal(q)
    G = make_generator(L, k, seed)
    w = _coded_products(A, x, G)
    subsets = list(combinations(range(L), k))
    for I in [subsets[i] for i in gen.choice(len(subsets), min(10, len(subsets)), replace=False)]:
        assert rel_err(decode([(i, w[i]) for i in I], G), A @ x) <= 1e-8


@settings(max_examples=30)
@given(st.integers(1, 5), st.integers(1, 4), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 999))
def test_encode_linear(k, rows, alpha, beta, seed):
    gen = np.random.default_rng(seed)
    G = make_generator(k + 2, k, seed)
    A, B = gen.standard_normal((2, k * rows, 3))
    lhs = encode(PartitionedMatrix.from_matrix(alpha * A + beta * B, k), G).blocks
    rhs = (alpha * encode(PartitionedMatrix.from_matrix(A, k), G).blocks
           + beta * encode(PartitionedMatrix.from_matrix(B, k), G).blocks)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * (1 + np.abs(lhs).max()))
