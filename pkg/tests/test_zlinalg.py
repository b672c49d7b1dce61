import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nzgeom import zlinalg as zl

small = st.integers(-6, 6)


def matrices(max_rows=4, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda m: st.integers(1, max_cols).flatmap(
            lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=m, max_size=m)
        )
    )


def random_symplectic(rng, n, steps=12):
    """Product of elementary symplectic matrices: (I S; 0 I), (I 0; S I), (G 0; 0 G^-t)."""
    X = np.array(zl.identity(2 * n), dtype=object)
    for _ in range(steps):
        kind = rng.integers(3)
        S = rng.integers(-2, 3, size=(n, n))
        S = (S + S.T).astype(object)
        E = np.array(zl.identity(2 * n), dtype=object)
        if kind == 0:
            E[:n, n:] = S
        elif kind == 1:
            E[n:, :n] = S
        else:
            i, j = rng.choice(n, 2, replace=False) if n > 1 else (0, 0)
            G = np.array(zl.identity(n), dtype=object)
            if n > 1:
                G[i, j] = int(rng.integers(-2, 3))
            E[:n, :n] = G
            E[n:, n:] = zl.unimodular_inverse(G).T
        X = X.dot(E)
    return zl.int_matrix(X)


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_smith_form_properties(rows):
    M = zl.int_matrix(rows)
    U, D, V = zl.smith_normal_form(M)
    assert (U.dot(M).dot(V) == D).all()
    assert abs(zl.det(U)) == 1 and abs(zl.det(V)) == 1
    diag = [int(D[i, i]) for i in range(min(D.shape))]
    off = [(i, j) for i in range(D.shape[0]) for j in range(D.shape[1]) if i != j and D[i, j]]
    assert not off
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_rank_matches_floating_point(rows):
    M = zl.int_matrix(rows)
    r, ker = zl.rank_and_kernel(M)
    assert r == np.linalg.matrix_rank(np.array(rows, dtype=float))
    assert len(ker) == M.shape[1] - r
    for k in ker:
        assert not any(M.dot(np.array(k, dtype=object)))


def test_smith_known_example():
    U, D, V = zl.smith_normal_form(zl.int_matrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]))
    assert [int(D[i, i]) for i in range(3)] == [2, 6, 12]


def test_int_matrix_is_read_only():
    M = zl.int_matrix([[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        M[0, 0] = 5


def test_row_lattice_basis_reconstructs():
    M = zl.int_matrix([[2, 4], [1, 2], [3, 6]])
    basis, coeffs = zl.row_lattice_basis(M)
    assert basis.shape[0] == 1
    assert (coeffs.dot(M) == basis).all()


def test_unimodular_inverse():
    G = zl.int_matrix([[2, 3], [1, 2]])
    assert (G.dot(zl.unimodular_inverse(G)) == zl.identity(2)).all()
    with pytest.raises(ValueError):
        zl.unimodular_inverse(zl.int_matrix([[2, 0], [0, 1]]))


def test_half_symplectic_verdicts():
    assert zl.is_half_symplectic(zl.int_matrix([[2, -1, 1, -2], [1, 0, 0, -1]]))
    v = zl.is_half_symplectic(zl.int_matrix([[1, 0, 1, 0], [0, 1, 0, 0]]))
    assert v and v.symmetric
    bad = zl.is_half_symplectic(zl.int_matrix([[1, 0, 0, 1], [0, 0, 1, 0]]))
    assert not bad.symmetric and bad.reasons
    sub = zl.is_half_symplectic(zl.int_matrix([[2, 0, 0, 0], [0, 1, 0, 0]]))
    assert sub.symmetric and not sub.spans_lattice


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_completion_of_random_half_symplectic(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        X = random_symplectic(rng, n)
        H = X[:n]
        assert zl.is_half_symplectic(H)
        K = zl.complete_to_symplectic(H)
        full = np.vstack([H, K])
        J = zl.symplectic_form(n)
        assert (full.T.dot(J).dot(full) == J).all()


def test_completion_rejects_non_half_symplectic():
    with pytest.raises(ValueError):
        zl.complete_to_symplectic(zl.int_matrix([[1, 0, 0, 1], [0, 0, 1, 0]]))


def test_saturate():
    S, T = zl.saturate(zl.int_matrix([[1, 1, 0], [0, 2, 2]]))
    assert zl.rank_and_kernel(S)[0] == 2
    U, D, V = zl.smith_normal_form(S)
    assert [int(D[i, i]) for i in range(2)] == [1, 1]


def test_matrix_text_round_trip():
    M = zl.int_matrix([[1, -2, 3], [0, 5, -6]])
    assert (zl.parse_matrix(zl.format_matrix(M)) == M).all()
    with pytest.raises(ValueError):
        zl.parse_matrix("2 2\n1 2\n")
