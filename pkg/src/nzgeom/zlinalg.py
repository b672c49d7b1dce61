"""Exact integer matrix algebra.

Matrices are numpy arrays with ``dtype=object`` holding Python ints, so no
operation ever overflows.  Every constructor here returns a read-only array.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fractions import Fraction

import numpy as np

__all__ = [
    "int_matrix",
    "identity",
    "zeros",
    "symplectic_form",
    "det",
    "smith_normal_form",
    "rank_and_kernel",
    "row_lattice_basis",
    "solve_left",
    "unimodular_inverse",
    "saturate",
    "HalfSymplecticVerdict",
    "is_half_symplectic",
    "is_symplectic",
    "complete_to_symplectic",
    "parse_matrix",
    "format_matrix",
]


def int_matrix(rows, shape=None) -> np.ndarray:
    """Build a read-only object-dtype integer matrix.

    ``rows`` may be nested sequences or an ndarray.  ``shape`` is only needed
    for empty matrices, where it cannot be inferred.
    """
    if isinstance(rows, np.ndarray):
        data = rows.tolist()
    else:
        data = [list(r) for r in rows]
    if shape is None:
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
    else:
        nrows, ncols = shape
    out = np.empty((nrows, ncols), dtype=object)
    for i in range(nrows):
        if len(data[i]) != ncols:
            raise ValueError("ragged matrix rows")
        for j in range(ncols):
            x = data[i][j]
            if isinstance(x, (float, np.floating)):
                if x != int(x):
                    raise ValueError(f"non-integer entry {x!r}")
            out[i, j] = int(x)
    out.flags.writeable = False
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=object)
    a.flags.writeable = False
    return a


def identity(n: int) -> np.ndarray:
    return int_matrix([[int(i == j) for j in range(n)] for i in range(n)], shape=(n, n))


def zeros(rows: int, cols: int) -> np.ndarray:
    return int_matrix([[0] * cols for _ in range(rows)], shape=(rows, cols))


def symplectic_form(n: int) -> np.ndarray:
    """The 2n x 2n matrix with blocks (0, -I; I, 0)."""
    J = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        J[i][n + i] = -1
        J[n + i][i] = 1
    return int_matrix(J, shape=(2 * n, 2 * n))


def det(M) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = [list(map(int, r)) for r in np.asarray(M, dtype=object).tolist()]
    n = len(A)
    if n == 0:
        return 1
    if any(len(r) != n for r in A):
        raise ValueError("determinant of a non-square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def smith_normal_form(M):
    """Return ``(U, D, V)`` with ``U @ M @ V == D`` in Smith normal form.

    U and V are unimodular and the diagonal of D is non-negative with each
    entry dividing the next.  The pivot is always the entry of least absolute
    value in the remaining block, ties broken by lowest (row, column) index,
    so the output is reproducible.
    """
    A = [list(map(int, r)) for r in np.asarray(M, dtype=object).tolist()]
    m = len(A)
    n = np.asarray(M).shape[1] if np.asarray(M).ndim == 2 else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        A[i], A[k] = A[k], A[i]
        U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for row in A:
            row[j], row[k] = row[k], row[j]
        for row in V:
            row[j], row[k] = row[k], row[j]

    def add_row(dst, src, c):
        # row_dst += c * row_src
        A[dst] = [a + c * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, c):
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    def min_pivot(t, cells):
        best = None
        for i, j in cells:
            a = abs(A[i][j])
            if a and (best is None or a < best[0]):
                best = (a, i, j)
        return best

    for t in range(min(m, n)):
        best = min_pivot(t, ((i, j) for i in range(t, m) for j in range(t, n)))
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
                    clean = clean and A[t][j] == 0
            if not clean:
                cells = [(i, t) for i in range(t, m)] + [(t, j) for j in range(t + 1, n)]
                _, i, j = min_pivot(t, cells)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % A[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
    return (
        int_matrix(U, shape=(m, m)),
        int_matrix(A, shape=(m, n)),
        int_matrix(V, shape=(n, n)),
    )


def _invariants(D) -> list[int]:
    r = min(D.shape)
    return [int(D[i, i]) for i in range(r) if D[i, i] != 0]


def rank_and_kernel(M):
    """Rank over Q and a basis of the integer (right) kernel lattice.

    The kernel basis is primitive: it spans every integer vector x with
    ``M @ x == 0``, not just a finite-index sublattice.
    """
    M = np.asarray(M, dtype=object)
    U, D, V = smith_normal_form(M)
    rank = len(_invariants(D))
    kernel = [tuple(int(V[i, j]) for i in range(V.shape[0])) for j in range(rank, V.shape[1])]
    return rank, kernel


def solve_left(B, r):
    """Integer row vector x with ``x @ B == r``, or None if there is none."""
    B = np.asarray(B, dtype=object)
    U, D, V = smith_normal_form(B)
    rv = np.asarray(r, dtype=object).dot(V)
    inv = _invariants(D)
    y = []
    for i, val in enumerate(rv.tolist()):
        if i < len(inv):
            if val % inv[i]:
                return None
            y.append(val // inv[i])
        elif val != 0:
            return None
    y += [0] * (B.shape[0] - len(y))
    return tuple(int(v) for v in np.asarray(y, dtype=object).dot(U))


def row_lattice_basis(M):
    """A Z-basis of the lattice spanned by the rows of M.

    Returns ``(basis, coeffs)`` with ``basis == coeffs @ M``.  Rows of M are
    kept verbatim whenever a greedy choice of independent rows already spans
    the whole lattice; otherwise the Smith-form basis is used.
    """
    M = np.asarray(M, dtype=object)
    chosen: list[int] = []
    for i in range(M.shape[0]):
        trial = chosen + [i]
        if rank_and_kernel(M[trial])[0] == len(trial):
            chosen = trial
    if chosen and all(solve_left(M[chosen], M[i]) is not None for i in range(M.shape[0])):
        coeffs = [[int(k == i) for k in range(M.shape[0])] for i in chosen]
        return int_matrix(M[chosen]), int_matrix(coeffs, shape=(len(chosen), M.shape[0]))
    U, D, V = smith_normal_form(M)
    r = len(_invariants(D))
    coeffs = U[:r]
    return int_matrix(coeffs.dot(M), shape=(r, M.shape[1])), int_matrix(coeffs, shape=(r, M.shape[0]))


def saturate(M):
    """Rows spanning (row space of M) intersected with Z^n, for M of full row rank.

    Returns ``(S, T)`` with ``S = T @ M`` where T is rational (a list of
    Fraction rows).  S equals M when the row lattice is already saturated.
    """
    M = np.asarray(M, dtype=object)
    U, D, _ = smith_normal_form(M)
    m = M.shape[0]
    if any(D[i, i] == 0 for i in range(m)):
        raise ValueError("rows are linearly dependent")
    if all(D[i, i] == 1 for i in range(m)):
        return _frozen(M), [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    UM = U.dot(M)
    S = [[x // int(D[i, i]) for x in UM[i]] for i in range(m)]
    T = [[Fraction(int(U[i, j]), int(D[i, i])) for j in range(m)] for i in range(m)]
    return int_matrix(S, shape=M.shape), T


def unimodular_inverse(G):
    """Exact inverse of a square integer matrix with determinant +-1."""
    G = np.asarray(G, dtype=object)
    U, D, V = smith_normal_form(G)
    if G.shape[0] != G.shape[1] or any(D[i, i] != 1 for i in range(G.shape[0])):
        raise ValueError("matrix is not unimodular")
    # U G V = I  =>  G^{-1} = V U
    return _frozen(V.dot(U))


@dataclass(frozen=True)
class HalfSymplecticVerdict:
    """Outcome of :func:`is_half_symplectic`; truthy iff both conditions hold."""

    symmetric: bool
    spans_lattice: bool
    invariants: tuple = ()
    reasons: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return self.symmetric and self.spans_lattice

    def __bool__(self) -> bool:
        return self.ok


def _split(H):
    H = np.asarray(H, dtype=object)
    if H.ndim != 2 or H.shape[1] != 2 * H.shape[0]:
        raise ValueError(f"expected an N x 2N matrix, got shape {H.shape}")
    N = H.shape[0]
    return H, H[:, :N], H[:, N:]


def is_half_symplectic(H) -> HalfSymplecticVerdict:
    """Check that H = (A B) has A B^t symmetric and columns spanning Z^N."""
    H, A, B = _split(H)
    N = H.shape[0]
    S = A.dot(B.T)
    symmetric = bool(np.all(S == S.T))
    _, D, _ = smith_normal_form(H)
    inv = _invariants(D)
    spans = len(inv) == N and all(d == 1 for d in inv)
    reasons = []
    if not symmetric:
        bad = [(i, j) for i in range(N) for j in range(i + 1, N) if S[i, j] != S[j, i]]
        reasons.append(f"A B^t not symmetric at {bad}")
    if not spans:
        reasons.append(f"columns span a sublattice: invariants {inv} (rank {len(inv)} of {N})")
    return HalfSymplecticVerdict(symmetric, spans, tuple(inv), tuple(reasons))


def is_symplectic(X) -> bool:
    X = np.asarray(X, dtype=object)
    if X.shape[0] != X.shape[1] or X.shape[0] % 2:
        return False
    J = symplectic_form(X.shape[0] // 2)
    return bool(np.all(X.T.dot(J).dot(X) == J))


def complete_to_symplectic(H):
    """Return (C D) such that ``[[A, B], [C, D]]`` is integral symplectic.

    A right inverse Y of H (from its Smith form) gives a first guess
    K0 = -Y^t J with H J K0^t = -I; the antisymmetric defect K0 J K0^t is then
    removed by adding a lower-triangular combination of the rows of H.
    """
    verdict = is_half_symplectic(H)
    if not verdict:
        raise ValueError("not half-symplectic: " + "; ".join(verdict.reasons))
    H = np.asarray(H, dtype=object)
    N = H.shape[0]
    J = symplectic_form(N)
    U, D, V = smith_normal_form(H)
    Y = V[:, :N].dot(U)
    K0 = -(Y.T.dot(J))
    W = K0.dot(J).dot(K0.T)
    S = np.array([[W[i, j] if j < i else 0 for j in range(N)] for i in range(N)], dtype=object)
    K = K0 + S.dot(H)
    X = np.vstack([H, K])
    assert is_symplectic(X), "completion failed the symplectic identity"
    return int_matrix(K, shape=(N, 2 * N))


def parse_matrix(text: str) -> np.ndarray:
    """Parse the text format: ``rows cols`` then one line per row."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty matrix text")
    try:
        rows, cols = (int(x) for x in lines[0].split())
        data = [[int(x) for x in ln.split()] for ln in lines[1 : 1 + rows]]
    except ValueError as exc:
        raise ValueError(f"malformed matrix text: {exc}") from None
    if len(data) != rows or any(len(r) != cols for r in data):
        raise ValueError(f"matrix text does not match declared shape {rows}x{cols}")
    return int_matrix(data, shape=(rows, cols))


def format_matrix(M) -> str:
    M = np.asarray(M, dtype=object)
    out = [f"{M.shape[0]} {M.shape[1]}"]
    out += [" ".join(str(int(x)) for x in row) for row in M.tolist()]
    return "\n".join(out) + "\n"
