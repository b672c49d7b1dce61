"""Bloch group algebra for half-symplectic matrices and their shapes.

A pair (H, z) consists of an N x 2N half-symplectic integer matrix
H = (A B) and shapes z solving

    prod_j z_j^A_ij = (-1)^(A B^t)_ii prod_j (1 - z_j)^B_ij.

Shapes are carried as LoggedPoints (u, v) with chosen logarithms of z and
1 - z; ``None`` stands for the degenerate shape z = 1 introduced by
stabilisation.  The extended element of a pair is

    sum_j [u_j, v_j] + [xi, xi'] + [-xi, xi' - xi + pi i],

with xi = e^t c, e = (A u - B v)/(pi i), c = C u - D v for a completion
(C D) of H, and xi' = log(1 - e^xi).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import zlinalg
from .dilogarithm import LoggedPoint, PrecisionContext, bloch_wigner, reduce_mod_4pi2, rogers_L
from .triangulation import (
    EDGE_KIND,
    Peripheral,
    Triangulation,
    TriangulationError,
    edge_exponents,
    nz_half_symplectic,
)
from .zlinalg import int_matrix

__all__ = [
    "BlochCombination",
    "HalfSymplecticPair",
    "ExtendedBlochElement",
    "WedgeLedger",
    "WedgeVerdict",
    "ShapeEquationReport",
    "Stabilize",
    "Unstabilize",
    "LeftUnimodular",
    "Renumber",
    "RotateShape",
    "ChangeCompletion",
    "verify_eq18",
    "pair_from_gluing",
    "extended_element",
    "regulator",
    "ledger_for_pair",
    "wedge_check",
    "five_term_numeric",
    "cyclic_sequence",
    "apply_move",
    "torsion_difference",
    "equal_up_to_torsion",
    "pachner_23",
    "PachnerResult",
    "pachner_five_term_residual",
]


def _ctx(ctx):
    return PrecisionContext() if ctx is None else ctx


@dataclass(frozen=True)
class BlochCombination:
    """A formal combination sum n_i [x_i] in Z[F]."""

    terms: tuple  # (coefficient, argument)

    def __post_init__(self):
        for c, x in self.terms:
            if c and x in (0, 1):
                raise ValueError(f"argument {x} not allowed with nonzero coefficient")

    def __add__(self, other):
        return BlochCombination(self.terms + other.terms)

    def __neg__(self):
        return BlochCombination(tuple((-c, x) for c, x in self.terms))

    def D(self, ctx=None):
        return mpmath.fsum(c * bloch_wigner(x, ctx) for c, x in self.terms if c)


# ---------------------------------------------------------------------------
# pairs


@dataclass(frozen=True)
class HalfSymplecticPair:
    H: np.ndarray
    points: tuple  # LoggedPoint, or None for a degenerate z = 1
    completion: np.ndarray | None = None

    def __post_init__(self):
        H = int_matrix(self.H)
        N = H.shape[0]
        if H.shape != (N, 2 * N) or len(self.points) != N:
            raise ValueError("need an N x 2N matrix and N shapes")
        verdict = zlinalg.is_half_symplectic(H)
        if not verdict:
            raise ValueError("matrix is not half-symplectic: " + "; ".join(verdict.reasons))
        object.__setattr__(self, "H", H)
        K = zlinalg.complete_to_symplectic(H) if self.completion is None else int_matrix(self.completion)
        if not zlinalg.is_symplectic(np.vstack([H, K])):
            raise ValueError("completion does not give a symplectic matrix")
        object.__setattr__(self, "completion", K)
        for j, p in enumerate(self.points):
            if p is None and any(self.B[:, j]):
                raise ValueError(f"degenerate shape {j} needs a zero column in B")

    @property
    def N(self):
        return self.H.shape[0]

    @property
    def A(self):
        return self.H[:, : self.N]

    @property
    def B(self):
        return self.H[:, self.N :]

    @property
    def C(self):
        return self.completion[:, : self.N]

    @property
    def D(self):
        return self.completion[:, self.N :]

    @property
    def shapes(self):
        return [None if p is None else mpmath.exp(p.u) for p in self.points]

    @classmethod
    def from_shapes(cls, H, z, completion=None, ctx=None):
        """Principal logarithms of the given shapes (1 means degenerate)."""
        pts = []
        for x in z:
            pts.append(None if x == 1 else LoggedPoint.from_z(x, ctx))
        return cls(H, tuple(pts), completion)


def _uv(P: HalfSymplecticPair):
    u = [mpmath.mpc(0) if p is None else mpmath.mpc(p.u) for p in P.points]
    v = [None if p is None else mpmath.mpc(p.v) for p in P.points]
    return u, v


def _lin(row, xs):
    return mpmath.fsum(int(a) * x for a, x in zip(row, xs) if a)


def _e_and_c(P: HalfSymplecticPair):
    """(A u - B v)/(pi i) and C u - D v, skipping degenerate columns of B, D."""
    u, v = _uv(P)
    live = [j for j, p in enumerate(P.points) if p is not None]
    vl = [v[j] for j in live]
    au_bv = [_lin(P.A[i], u) - _lin(P.B[i, live], vl) for i in range(P.N)]
    e_raw = [x / mpmath.mpc(0, mpmath.pi) for x in au_bv]
    cu = [_lin(P.C[i], u) - _lin(P.D[i, live], vl) for i in range(P.N)]
    return e_raw, cu


@dataclass(frozen=True)
class ShapeEquationReport:
    residuals: tuple  # per row, log form reduced mod 2 pi i
    e: tuple  # (A u - B v)/(pi i), rounded
    parity_ok: tuple  # e_i = (A B^t)_ii mod 2
    tol: float

    @property
    def ok(self):
        return all(r < self.tol for r in self.residuals) and all(self.parity_ok)

    @property
    def failing_rows(self):
        return [i for i, (r, p) in enumerate(zip(self.residuals, self.parity_ok)) if not (r < self.tol and p)]


def verify_eq18(P: HalfSymplecticPair, tol=None, ctx=None) -> ShapeEquationReport:
    """Check the generalised gluing equations of H at the shapes of P, with signs."""
    ctx = _ctx(ctx)
    tol = max(ctx.error_bound, 1e-12) if tol is None else tol
    with ctx.workdps():
        for j, p in enumerate(P.points):
            if p is not None:
                z = mpmath.exp(p.u)
                if abs(z) < 1e-30 or abs(1 - z) < 1e-30:
                    raise ValueError(f"shape {j} touches 0 or 1")
        e_raw, _ = _e_and_c(P)
        S = P.A.dot(P.B.T)
        res, es, par = [], [], []
        for i, x in enumerate(e_raw):
            # x = e_i exactly when the equation holds with the right sign
            k = int(mpmath.nint(x.real))
            dist_int = abs(x - k)
            target = int(S[i, i]) % 2
            # residual of the multiplicative equation, taken mod 2 pi i
            k2 = k if (k - target) % 2 == 0 else k + (1 if x.real >= k else -1)
            res.append(float(min(abs(x - k2), mpmath.mpf(1)) * mpmath.pi))
            es.append(k)
            par.append(dist_int * mpmath.pi < tol and (k - target) % 2 == 0)
    return ShapeEquationReport(tuple(res), tuple(es), tuple(par), tol)


def pair_from_gluing(G, s, slopes=None) -> HalfSymplecticPair:
    """The pair of a solved triangulation: H from the gluing data, logs from s.

    When the gluing rows span a non-saturated lattice, H has the rows of the
    saturation; they are rational combinations of gluing equations and
    verify_eq18 checks that they still hold at s.
    """
    H, _ = nz_half_symplectic(G, slopes)
    return HalfSymplecticPair(H, tuple(s.logs))


# ---------------------------------------------------------------------------
# extended element and regulator


@dataclass(frozen=True)
class ExtendedBlochElement:
    terms: tuple  # (coefficient, LoggedPoint)
    xi: complex = 0
    xi_prime: complex | None = None
    e: tuple = ()

    def __add__(self, other):
        return ExtendedBlochElement(self.terms + other.terms)


def extended_element(P: HalfSymplecticPair, xi_branch: int = 0, ctx=None) -> ExtendedBlochElement:
    """The element sum [u_j, v_j] + [xi, xi'] + [-xi, xi' - xi + pi i].

    ``xi_branch`` adds 2 pi i xi_branch to the principal log chosen for xi'.
    When xi = 0 the two correction terms cancel in the limit and are left out.
    """
    ctx = _ctx(ctx)
    with ctx.workdps():
        rep = verify_eq18(P, ctx=ctx)
        if not all(rep.parity_ok):
            raise ValueError(f"shapes do not solve the equations of H (rows {rep.failing_rows})")
        e = rep.e
        _, c = _e_and_c(P)
        for j, p in enumerate(P.points):
            if p is None and int(np.dot(np.array(e, dtype=object), P.D[:, j])) != 0:
                raise ValueError(f"degenerate shape {j} enters xi")
        xi = mpmath.fsum(ei * ci for ei, ci in zip(e, c) if ei)
        terms = [(1, p) for p in P.points if p is not None]
        if all(ei == 0 for ei in e) or abs(xi) < mpmath.mpf(10) ** (-ctx.digits):
            return ExtendedBlochElement(tuple(terms), xi, None, tuple(e))
        w = 1 - mpmath.exp(xi)
        if abs(w) < mpmath.mpf(10) ** (2 - ctx.digits):
            raise ValueError("e^xi = 1: degenerate correction term")
        xp = mpmath.log(w) + 2j * mpmath.pi * xi_branch
        terms.append((1, LoggedPoint(xi, xp)))
        terms.append((1, LoggedPoint(-xi, xp - xi + 1j * mpmath.pi)))
    return ExtendedBlochElement(tuple(terms), xi, xp, tuple(e))


def regulator(E: ExtendedBlochElement, ctx=None, reduce=True):
    """sum of coefficient * (L(v) + uv/2 - pi^2/6), modulo 4 pi^2."""
    ctx = _ctx(ctx)
    with ctx.workdps():
        val = mpmath.fsum(c * rogers_L(p, ctx) for c, p in E.terms if c)
        return reduce_mod_4pi2(val, ctx) if reduce else val


def torsion_difference(a, b, max_den: int = 8, tol: float = 1e-9):
    """Write a - b as pi^2 * r with r rational of denominator <= max_den.

    Returns the Fraction r, or None if the difference is not of that form.
    """
    d = mpmath.mpc(a) - mpmath.mpc(b)
    if abs(d.imag) > tol:
        return None
    r = d.real / mpmath.pi**2
    frac = Fraction(float(r)).limit_denominator(max_den)
    if abs(r - mpmath.mpf(frac.numerator) / frac.denominator) * mpmath.pi**2 > tol:
        return None
    return frac


def equal_up_to_torsion(a, b, max_den: int = 8, tol: float = 1e-9) -> bool:
    return torsion_difference(a, b, max_den, tol) is not None


# ---------------------------------------------------------------------------
# exact wedge bookkeeping


@dataclass(frozen=True)
class WedgeLedger:
    """Integer coordinates of every u, v over a basis of logarithm symbols.

    ``coords[k] = (u_vec, v_vec)`` for the k-th term of the element.  A
    symbol may be flagged as divisible by 2 in the ambient group (pi i is
    twice pi i/2), which kills its self-wedge.
    """

    symbols: tuple
    coords: tuple
    divisible: frozenset = frozenset()


@dataclass(frozen=True)
class WedgeVerdict:
    off_diagonal: dict  # (a, b) with a < b -> coefficient of s_a ^ s_b
    diagonal: dict  # a -> coefficient of s_a ^ s_a (2-torsion)

    @property
    def vanishes(self):
        return not any(self.off_diagonal.values()) and not any(self.diagonal.values())

    def __bool__(self):
        return self.vanishes


def wedge_check(E: ExtendedBlochElement, L: WedgeLedger) -> WedgeVerdict:
    """Exact value of sum coeff * u ^ v in the antisymmetric square.

    Only x^y + y^x = 0 is imposed, so s^s survives as 2-torsion unless the
    symbol is divisible by 2.
    """
    if len(L.coords) != len(E.terms):
        raise ValueError("ledger does not describe every term of the element")
    m = len(L.symbols)
    off = {(a, b): 0 for a in range(m) for b in range(a + 1, m)}
    diag = {a: 0 for a in range(m)}
    for (c, _), (uu, vv) in zip(E.terms, L.coords):
        if len(uu) != m or len(vv) != m:
            raise ValueError("point not expressible over the ledger basis")
        for a in range(m):
            if not uu[a]:
                continue
            for b in range(m):
                if not vv[b]:
                    continue
                w = c * int(uu[a]) * int(vv[b])
                if a < b:
                    off[(a, b)] += w
                elif a > b:
                    off[(b, a)] -= w
                else:
                    diag[a] += w
    div = {L.symbols.index(s) for s in L.divisible}
    diag = {a: (0 if a in div else x % 2) for a, x in diag.items()}
    return WedgeVerdict({k: x for k, x in off.items() if x}, {a: x for a, x in diag.items() if x})


def ledger_for_pair(P: HalfSymplecticPair, E: ExtendedBlochElement) -> WedgeLedger:
    """Express every log of the element over the symbols c_1..c_N, pi i, xi'.

    Inverting the symplectic matrix gives u = pi i D^t e - B^t c and
    v = pi i C^t e - A^t c, where c = C u - D v are taken as free symbols.
    """
    N = P.N
    e = np.array(E.e, dtype=object)
    symbols = tuple(f"c{i + 1}" for i in range(N)) + ("pi*i", "xi'")
    m = N + 2
    PI, XP = N, N + 1
    coords = []
    Dte = P.D.T.dot(e)
    Cte = P.C.T.dot(e)
    for j, p in enumerate(P.points):
        if p is None:
            continue
        uu = [0] * m
        vv = [0] * m
        for i in range(N):
            uu[i] = -int(P.B[i, j])
            vv[i] = -int(P.A[i, j])
        uu[PI] = int(Dte[j])
        vv[PI] = int(Cte[j])
        coords.append((tuple(uu), tuple(vv)))
    if E.xi_prime is not None:
        xi = [int(x) for x in e] + [0, 0]
        xp = [0] * m
        xp[XP] = 1
        coords.append((tuple(xi), tuple(xp)))
        neg = [-x for x in xi]
        v2 = [a - b for a, b in zip(xp, xi)]
        v2[PI] += 1
        coords.append((tuple(neg), tuple(v2)))
    if E.xi_prime is None and any(e):
        # xi = e^t c vanished numerically, so the c symbols obey e^t c = 0;
        # eliminate one of them (needs a unit entry of e)
        units = [a for a in range(N) if abs(int(e[a])) == 1]
        if not units:
            raise ValueError("xi = 0 with e not primitive: c symbols not independent over Z")
        a = units[0]
        ea = int(e[a])
        out = []
        for vecs in coords:
            new = []
            for w in vecs:
                w = list(w)
                x, w[a] = w[a], 0
                for b in range(N):
                    if b != a:
                        w[b] -= x * ea * int(e[b])
                new.append(tuple(w[:a] + w[a + 1 :]))
            out.append(tuple(new))
        coords = out
        symbols = symbols[:a] + symbols[a + 1 :]
    return WedgeLedger(symbols, tuple(coords), frozenset({"pi*i"}))


# ---------------------------------------------------------------------------
# five-term relations


def five_term_numeric(x, y, ctx=None):
    """|D(x) + D(y) + D((1-x)/(1-xy)) + D(1-xy) + D((1-y)/(1-xy))|."""
    ctx = _ctx(ctx)
    with ctx.workdps():
        x, y = mpmath.mpc(x), mpmath.mpc(y)
        w = 1 - x * y
        if w == 0 or x == 0 or y == 0:
            raise ValueError("degenerate arguments")
        args = [x, y, (1 - x) / w, w, (1 - y) / w]
        return abs(mpmath.fsum(bloch_wigner(a, ctx) for a in args))


def cyclic_sequence(z0, z1, length=10):
    """Terms of z_{i+1} = (1 - z_i)/z_{i-1}; exact for Fraction seeds."""
    seq = [z0, z1]
    while len(seq) < length:
        if seq[-2] == 0:
            raise ZeroDivisionError("sequence hits 0")
        seq.append((1 - seq[-1]) / seq[-2])
    return seq


# ---------------------------------------------------------------------------
# moves


@dataclass(frozen=True)
class Stabilize:
    pass


@dataclass(frozen=True)
class Unstabilize:
    pass


@dataclass(frozen=True)
class LeftUnimodular:
    G: object


@dataclass(frozen=True)
class Renumber:
    perm: tuple  # new column j is old column perm[j]


@dataclass(frozen=True)
class RotateShape:
    j: int
    k: int  # 0, 1, 2 for z, z', z''


@dataclass(frozen=True)
class ChangeCompletion:
    T: object  # symmetric integer matrix: (C D) -> (C + T A, D + T B)


# right action on the column pair (A_j, B_j) taking z to z'
_ROT = int_matrix([[-1, -1], [1, 0]])


def _rotate_point(p: LoggedPoint, k: int) -> LoggedPoint:
    pi_i = mpmath.mpc(0, mpmath.pi)
    u, v = mpmath.mpc(p.u), mpmath.mpc(p.v)
    for _ in range(k % 3):
        # z' = 1/(1 - z): log z' = -v, log(1 - z') = log(-z/(1 - z)) = u - v + pi i
        u, v = -v, u - v + pi_i
    return LoggedPoint(u, v)


def apply_move(P: HalfSymplecticPair, move) -> HalfSymplecticPair:
    N = P.N
    A, B, C, D = P.A, P.B, P.C, P.D
    if isinstance(move, Stabilize):
        A2 = zlinalg.zeros(N + 1, N + 1)
        B2 = zlinalg.zeros(N + 1, N + 1)
        C2 = zlinalg.zeros(N + 1, N + 1)
        D2 = zlinalg.zeros(N + 1, N + 1)
        A2 = np.array(A2, dtype=object)
        B2 = np.array(B2, dtype=object)
        C2 = np.array(C2, dtype=object)
        D2 = np.array(D2, dtype=object)
        A2[:N, :N], B2[:N, :N], C2[:N, :N], D2[:N, :N] = A, B, C, D
        A2[N, N] = 1
        D2[N, N] = 1
        return HalfSymplecticPair(np.hstack([A2, B2]), P.points + (None,), np.hstack([C2, D2]))
    if isinstance(move, Unstabilize):
        j = N - 1
        if P.points[j] is not None or A[j, j] != 1 or any(A[j, :j]) or any(A[:j, j]) or any(B[j]) or any(B[:, j]):
            raise ValueError("last column is not a stabilised degenerate shape")
        if any(C[:j, j]) or any(C[j]) or D[j, j] != 1 or any(D[j, :j]) or any(D[:j, j]):
            K = None
        else:
            K = np.hstack([C[:j, :j], D[:j, :j]])
        return HalfSymplecticPair(np.hstack([A[:j, :j], B[:j, :j]]), P.points[:j], K)
    if isinstance(move, LeftUnimodular):
        G = int_matrix(move.G)
        Ginv = zlinalg.unimodular_inverse(G)
        GT = Ginv.T
        H2 = np.hstack([G.dot(A), G.dot(B)])
        K2 = np.hstack([GT.dot(C), GT.dot(D)])
        return HalfSymplecticPair(H2, P.points, K2)
    if isinstance(move, Renumber):
        perm = list(move.perm)
        if sorted(perm) != list(range(N)):
            raise ValueError("not a permutation")
        H2 = np.hstack([A[:, perm], B[:, perm]])
        K2 = np.hstack([C[:, perm], D[:, perm]])
        return HalfSymplecticPair(H2, tuple(P.points[i] for i in perm), K2)
    if isinstance(move, RotateShape):
        j, k = move.j, move.k % 3
        if P.points[j] is None:
            raise ValueError("cannot rotate a degenerate shape")
        R = zlinalg.identity(2)
        for _ in range(k):
            R = R.dot(_ROT)
        A2, B2, C2, D2 = (np.array(X, dtype=object) for X in (A, B, C, D))
        for X, Y in ((A2, B2), (C2, D2)):
            pair = np.stack([X[:, j], Y[:, j]], axis=1).dot(R)
            X[:, j], Y[:, j] = pair[:, 0], pair[:, 1]
        pts = list(P.points)
        pts[j] = _rotate_point(pts[j], k)
        return HalfSymplecticPair(np.hstack([A2, B2]), tuple(pts), np.hstack([C2, D2]))
    if isinstance(move, ChangeCompletion):
        T = int_matrix(move.T)
        if (T != T.T).any():
            raise ValueError("T must be symmetric")
        K2 = np.hstack([C + T.dot(A), D + T.dot(B)])
        return HalfSymplecticPair(P.H, P.points, K2)
    raise TypeError(f"unknown move {move!r}")


# ---------------------------------------------------------------------------
# 2-3 Pachner move on triangulations


@dataclass(frozen=True)
class PachnerResult:
    triangulation: Triangulation
    new_tets: tuple  # indices of the three new tetrahedra
    seed_shapes: tuple | None = None  # shapes of the new triangulation, if old ones given
    flat: tuple = ()  # new tetrahedra whose seed shape is real (degenerate)


def _det3(a, b, c):
    return float(np.linalg.det(np.array([a, b, c], dtype=float)))


def _orientation(pos, labels):
    p0 = pos[labels[0]]
    return _det3(*(pos[l] - p0 for l in labels[1:]))


def _positive_order(pos, labels):
    labels = sorted(labels)
    if _orientation(pos, labels) < 0:
        labels[0], labels[1] = labels[1], labels[0]
    return tuple(labels)


def _param(z, kind):
    """The shape parameter of kind 0, 1, 2 (z, z', z'') of a shape z."""
    if kind == 0:
        return z
    if kind == 1:
        return 1 / (1 - z)
    return 1 - 1 / z


def pachner_23(T: Triangulation, tet: int, face: int, shapes=None) -> PachnerResult:
    """Replace the two tetrahedra across face ``face`` of ``tet`` by three.

    Peripheral rows are transported by writing each old shape parameter as
    the product of the new parameters at the subdivided edge.  If ``shapes``
    (old shapes) are given, the corresponding new shapes are returned.
    """
    N = T.N
    t0, f0 = tet, face
    t1, f1, p = T.gluings[t0][f0]
    if t1 == t0:
        raise TriangulationError("face is glued to its own tetrahedron; move undefined")
    pinv = tuple(p.index(i) for i in range(4))
    D0, D1 = f0, 4
    # label of every vertex of t1
    lab1 = [pinv[j] if j != f1 else D1 for j in range(4)]
    face_labels = [x for x in range(4) if x != f0]
    pos = {0: np.array([0.0, 0, 0]), 1: np.array([1.0, 0, 0]), 2: np.array([0.0, 1, 0]), 3: np.array([0.0, 0, 1])}
    centroid = sum(pos[x] for x in face_labels) / 3
    pos[D1] = 2 * centroid - pos[D0]
    if _orientation(pos, [0, 1, 2, 3]) <= 0 or _orientation(pos, lab1) <= 0:
        raise TriangulationError("gluing across the face is not orientation-compatible")
    new_index = {face_labels[0]: t0, face_labels[1]: t1, face_labels[2]: N}
    order = {x: _positive_order(pos, [D0, D1] + [y for y in face_labels if y != x]) for x in face_labels}

    def old_face(t, f):
        """(new tet, new face, old-local -> new-local vertex map)."""
        if t == t0:
            x = f
            labels = list(range(4))
            opp = D1
        elif t == t1:
            x = lab1[f]
            labels = lab1
            opp = D0
        else:
            return t, f, (0, 1, 2, 3)
        ordx = order[x]
        m = tuple(ordx.index(labels[i]) if i != f else ordx.index(opp) for i in range(4))
        return new_index[x], ordx.index(opp), m

    gl = [list(g) for g in T.gluings] + [[None] * 4]
    for t in range(N):
        for f in range(4):
            if (t, f) in ((t0, f0), (t1, f1)):
                continue
            if t in (t0, t1):
                tn, fn, m = old_face(t, f)
            elif T.gluings[t][f][0] in (t0, t1):
                tn, fn, m = t, f, (0, 1, 2, 3)
            else:
                continue
            t2, f2, pi_ = T.gluings[t][f]
            tn2, fn2, m2 = old_face(t2, f2)
            minv = [m.index(k) for k in range(4)]
            gl[tn][fn] = (tn2, fn2, tuple(m2[pi_[minv[k]]] for k in range(4)))
    # internal faces {D0, D1, w}: T_x's face opposite y meets T_y's face opposite x
    for x, y in itertools.permutations(face_labels, 2):
        ox, oy = order[x], order[y]
        perm = tuple(oy.index(ox[k]) if ox[k] != y else oy.index(x) for k in range(4))
        gl[new_index[x]][ox.index(y)] = (new_index[y], oy.index(x), perm)

    from .triangulation import _validate

    newT = _validate([tuple(g) for g in gl], None)
    if len(newT.edge_classes) != N + 1:
        raise TriangulationError("unexpected edge count after the move")

    peripheral = None
    if T.peripheral is not None:
        peripheral = _transport_peripheral(T, t0, t1, lab1, order, new_index, face_labels)
    newT = Triangulation(newT.gluings, peripheral, T.name + "+23" if T.name else "")

    seeds, flat = None, ()
    if shapes is not None:
        seeds = _new_shapes(shapes, t0, t1, lab1, order, new_index, face_labels)
        flat = tuple(new_index[x] for x in face_labels if abs(mpmath.im(seeds[new_index[x]])) < 1e-12)
    return PachnerResult(newT, tuple(new_index[x] for x in face_labels), seeds, flat)


def pachner_five_term_residual(old_shapes, result: PachnerResult, ctx=None):
    """|sum D(new shapes) - sum D(old shapes)| for the tetrahedra the move touched."""
    if result.seed_shapes is None:
        raise ValueError("move was applied without shapes")
    new = result.new_tets
    old = [t for t in new if t < len(old_shapes)]
    ctx = _ctx(ctx)
    with ctx.workdps():
        a = mpmath.fsum(bloch_wigner(result.seed_shapes[t], ctx) for t in new)
        b = mpmath.fsum(bloch_wigner(old_shapes[t], ctx) for t in old)
        return abs(a - b)


def _edge_kind(order, a, b):
    i, j = sorted((order.index(a), order.index(b)))
    return EDGE_KIND[(i, j)]


def _split_edges(t0, t1, lab1, order, new_index, face_labels):
    """For each old (tet, local edge) through d0 or d1: the new (tet, kind) pieces."""
    D0, D1 = None, 4
    out = {}
    for t, labels in ((t0, list(range(4))), (t1, lab1)):
        apex = [l for l in labels if l not in face_labels][0]
        for a, b in itertools.combinations(range(4), 2):
            la, lb = labels[a], labels[b]
            if apex in (la, lb):
                y = lb if la == apex else la
                pieces = [(new_index[x], _edge_kind(order[x], la, lb)) for x in face_labels if x != y]
            else:
                (x,) = [w for w in face_labels if w not in (la, lb)]
                pieces = [(new_index[x], _edge_kind(order[x], la, lb))]
            out[(t, (a, b))] = pieces
    return out


def _transport_peripheral(T, t0, t1, lab1, order, new_index, face_labels):
    N = T.N
    P = T.peripheral
    split = _split_edges(t0, t1, lab1, order, new_index, face_labels)
    apex0 = [l for l in range(4) if l not in face_labels][0]

    def old_shape_logs(t, labels, apex):
        """log z_t and log(1 - z_t) as {new tet: (r1, r2)} plus a pi i count."""
        e_z = (0, 1) if apex in (labels[0], labels[1]) else (2, 3)
        e_zp = (0, 2) if apex in (labels[0], labels[2]) else (1, 3)
        res = []
        for edge, sgn in ((e_z, 1), (e_zp, -1)):
            acc, npi = {}, 0
            for tn, kind in split[(t, edge)]:
                (r1, r2), _, c = edge_exponents([kind])
                a, b = acc.get(tn, (0, 0))
                acc[tn] = (a + sgn * r1, b + sgn * r2)
                npi += sgn * c
            res.append((acc, npi))
        return res

    rows = {}
    subst = {t0: old_shape_logs(t0, list(range(4)), apex0), t1: old_shape_logs(t1, lab1, 4)}
    mats = []
    for M, MM in ((P.Mp, P.Mpp), (P.Lp, P.Lpp)):
        h = M.shape[0]
        newA = [[0] * (N + 1) for _ in range(h)]
        newB = [[0] * (N + 1) for _ in range(h)]
        flips = [0] * h
        for i in range(h):
            for t in range(N):
                a, b = int(M[i, t]), int(MM[i, t])
                if t not in subst:
                    newA[i][t] += a
                    newB[i][t] += b
                    continue
                (zmap, zpi), (wmap, wpi) = subst[t]
                for coef, (mp_, npi) in ((a, (zmap, zpi)), (b, (wmap, wpi))):
                    for tn, (r1, r2) in mp_.items():
                        newA[i][tn] += coef * r1
                        newB[i][tn] += coef * r2
                    flips[i] += coef * npi
        mats.append((int_matrix(newA, shape=(h, N + 1)), int_matrix(newB, shape=(h, N + 1)), flips))
    (Mp, Mpp, fm), (Lp, Lpp, fl) = mats
    h = P.Mp.shape[0]
    signs = tuple(P.signs[i] * (-1) ** (fm[i] % 2) for i in range(h)) + tuple(
        P.signs[h + i] * (-1) ** (fl[i] % 2) for i in range(h)
    )
    return Peripheral(Mp, Mpp, Lp, Lpp, signs)


def _new_shapes(shapes, t0, t1, lab1, order, new_index, face_labels):
    """Shapes of the new tetrahedra: T_x at edge ab gets w_t0(ab) w_t1(ab)."""
    out = list(shapes) + [None]
    for x in face_labels:
        a, b = [y for y in face_labels if y != x]
        # parameter of t0 at edge ab (labels are t0-local) and of t1 at the same edge
        k0 = EDGE_KIND[tuple(sorted((a, b)))]
        ia, ib = lab1.index(a), lab1.index(b)
        k1 = EDGE_KIND[tuple(sorted((ia, ib)))]
        w = _param(mpmath.mpc(shapes[t0]), k0) * _param(mpmath.mpc(shapes[t1]), k1)
        kind = _edge_kind(order[x], a, b)
        # invert w = param_kind(z)
        if kind == 0:
            z = w
        elif kind == 1:
            z = 1 - 1 / w
        else:
            z = 1 / (1 - w)
        out[new_index[x]] = z
    return tuple(out)
