"""Combinatorial ideal triangulations and their gluing-equation matrices.

Vertex and edge conventions: face ``k`` of a tetrahedron is the face opposite
vertex ``k``; the opposite edge pairs {01, 23}, {02, 13}, {03, 12} carry the
shape parameters z, z' = 1/(1-z) and z'' = 1 - 1/z respectively.  Exponents
are recorded over the basis (z, 1-z), so z contributes (1, 0), z' contributes
(0, -1) and z'' = -(1-z)/z contributes (-1, 1) together with a sign.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import zlinalg
from .zlinalg import int_matrix

__all__ = [
    "TriangulationError",
    "Peripheral",
    "Triangulation",
    "GluingData",
    "NeumannComplex",
    "NZReport",
    "EDGE_KIND",
    "edge_exponents",
    "parse_triangulation",
    "load_triangulation",
    "derive_edge_matrices",
    "neumann_complex",
    "verify_nz_symplectic",
    "nz_half_symplectic",
]

EDGES = tuple(itertools.combinations(range(4), 2))
# which of z, z', z'' sits on each edge of a tetrahedron
EDGE_KIND = {(0, 1): 0, (2, 3): 0, (0, 2): 1, (1, 3): 1, (0, 3): 2, (1, 2): 2}
# (exponent of z, exponent of 1-z, multiple of pi*i in the logarithm)
_KIND_EXPONENTS = {0: (1, 0, 0), 1: (0, -1, 0), 2: (-1, 1, 1)}


class TriangulationError(ValueError):
    pass


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def edge_exponents(kinds):
    """Accumulate shape-parameter occurrences into (z, 1-z) exponents.

    ``kinds`` lists 0, 1, 2 for z, z', z''.  Returns ``((r1, r2), sign,
    pi_count)`` where the product of the listed parameters equals
    ``sign * z**r1 * (1 - z)**r2`` and, with principal logarithms of
    positively oriented shapes, its logarithm is ``r1 log z + r2 log(1-z) +
    pi_count * pi * i``.
    """
    r1 = r2 = npi = 0
    for k in kinds:
        a, b, c = _KIND_EXPONENTS[k]
        r1, r2, npi = r1 + a, r2 + b, npi + c
    return (r1, r2), (-1) ** npi, npi


@dataclass(frozen=True)
class Peripheral:
    """Meridian and longitude rows over (z, 1-z), one row per cusp."""

    Mp: np.ndarray
    Mpp: np.ndarray
    Lp: np.ndarray
    Lpp: np.ndarray
    signs: tuple  # meridian signs then longitude signs


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def classes(self):
        groups: dict = {}
        for x in sorted(self.parent):
            groups.setdefault(self.find(x), []).append(x)
        return [tuple(g) for _, g in sorted(groups.items())]


@dataclass(frozen=True)
class Triangulation:
    """A validated oriented ideal triangulation.

    ``gluings[t][k] = (t2, f2, perm)`` glues face k of tetrahedron t to face f2
    of tetrahedron t2, sending vertex i to vertex ``perm[i]``.
    """

    gluings: tuple
    peripheral: Peripheral | None = None
    name: str = ""

    @property
    def N(self) -> int:
        return len(self.gluings)

    @cached_property
    def edge_classes(self):
        """Edge classes as tuples of (tet, (a, b)) members, sorted."""
        uf = _UnionFind([(t, e) for t in range(self.N) for e in EDGES])
        for t in range(self.N):
            for k in range(4):
                t2, _, p = self.gluings[t][k]
                for a, b in EDGES:
                    if k not in (a, b):
                        uf.union((t, (a, b)), (t2, tuple(sorted((p[a], p[b])))))
        return uf.classes()

    @cached_property
    def cusp_classes(self):
        uf = _UnionFind([(t, v) for t in range(self.N) for v in range(4)])
        for t in range(self.N):
            for k in range(4):
                t2, _, p = self.gluings[t][k]
                for v in range(4):
                    if v != k:
                        uf.union((t, v), (t2, p[v]))
        return uf.classes()

    @property
    def h(self) -> int:
        return len(self.cusp_classes)

    def cusp_of(self, t: int, v: int) -> int:
        for i, cls in enumerate(self.cusp_classes):
            if (t, v) in cls:
                return i
        raise KeyError((t, v))

    def to_text(self) -> str:
        lines = [f"{self.N} {self.h}"]
        for t in range(self.N):
            for k in range(4):
                t2, f2, p = self.gluings[t][k]
                lines.append(f"face {k} -> tet {t2} face {f2} perm {''.join(map(str, p))}")
        if self.peripheral is not None:
            P = self.peripheral
            lines.append("PERIPHERAL")
            for M in (P.Mp, P.Mpp, P.Lp, P.Lpp):
                lines.append(zlinalg.format_matrix(M).rstrip("\n"))
            lines.append(" ".join(str(s) for s in P.signs))
        return "\n".join(lines) + "\n"


def _validate(gluings, declared_h):
    N = len(gluings)
    for t in range(N):
        for k in range(4):
            t2, f2, p = gluings[t][k]
            if not 0 <= t2 < N:
                raise TriangulationError(f"tet {t} face {k}: no tetrahedron {t2}")
            if sorted(p) != [0, 1, 2, 3] or p[k] != f2:
                raise TriangulationError(f"tet {t} face {k}: bad permutation {p}")
            if (t2, f2) == (t, k):
                raise TriangulationError(f"tet {t} face {k} is glued to itself")
            back = gluings[t2][f2]
            inverse = tuple(p.index(i) for i in range(4))
            if back[0] != t or back[1] != k or tuple(back[2]) != inverse:
                raise TriangulationError(f"non-involutive gluing at tet {t} face {k}")
            if _perm_sign(p) != -1:
                raise TriangulationError(f"orientation-reversing gluing at tet {t} face {k}")
    T = Triangulation(tuple(tuple(g) for g in gluings))
    if len(T.edge_classes) != N:
        raise TriangulationError(f"{len(T.edge_classes)} edge classes for {N} tetrahedra")
    if declared_h is not None and T.h != declared_h:
        raise TriangulationError(f"declared {declared_h} cusps, found {T.h}")
    return T


_FACE_LINE = "face k -> tet t face f perm p0p1p2p3"


def parse_triangulation(text: str, name: str = "") -> Triangulation:
    """Parse and validate the ``.tri`` text format."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise TriangulationError("empty triangulation file")
    try:
        N, h = (int(x) for x in lines[0].split())
    except ValueError:
        raise TriangulationError("first line must be 'N h'") from None
    if N < 1:
        raise TriangulationError("need at least one tetrahedron")
    body = lines[1:]
    if "PERIPHERAL" in body:
        cut = body.index("PERIPHERAL")
        face_lines, periph_lines = body[:cut], body[cut + 1 :]
    else:
        face_lines, periph_lines = body, None
    gluings = [[None] * 4 for _ in range(N)]
    for ln in face_lines:
        tok = ln.split()
        if len(tok) != 9 or tok[0] != "face" or tok[2] != "->" or tok[3] != "tet" or tok[5] != "face" or tok[7] != "perm":
            raise TriangulationError(f"expected '{_FACE_LINE}', got {ln!r}")
        if len(tok[8]) != 4 or not tok[8].isdigit():
            raise TriangulationError(f"bad permutation {tok[8]!r}")
        try:
            k, t2, f2 = int(tok[1]), int(tok[4]), int(tok[6])
        except ValueError:
            raise TriangulationError(f"non-integer field in {ln!r}") from None
        # face lines come in tetrahedron order, four per tetrahedron
        t = next((i for i in range(N) if None in gluings[i]), None)
        if t is None or not 0 <= k < 4 or gluings[t][k] is not None:
            raise TriangulationError(f"unexpected face line {ln!r}")
        gluings[t][k] = (t2, f2, tuple(int(c) for c in tok[8]))
    for t in range(N):
        for k in range(4):
            if gluings[t][k] is None:
                raise TriangulationError(f"unglued face: tet {t} face {k}")
    T = _validate(gluings, h)
    peripheral = _parse_peripheral(periph_lines, T.h, N) if periph_lines is not None else None
    return Triangulation(T.gluings, peripheral, name)


def _parse_peripheral(lines, h, N):
    mats = []
    pos = 0
    for _ in range(4):
        if pos >= len(lines):
            raise TriangulationError("truncated PERIPHERAL block")
        rows, cols = (int(x) for x in lines[pos].split())
        if (rows, cols) != (h, N):
            raise TriangulationError(f"peripheral matrix must be {h}x{N}, got {rows}x{cols}")
        mats.append(zlinalg.parse_matrix("\n".join(lines[pos : pos + 1 + rows])))
        pos += 1 + rows
    if pos >= len(lines):
        raise TriangulationError("missing peripheral sign line")
    signs = tuple(int(x) for x in lines[pos].split())
    if len(signs) != 2 * h or any(s not in (1, -1) for s in signs):
        raise TriangulationError(f"sign line needs {2 * h} entries of +-1")
    return Peripheral(*mats, signs)


def load_triangulation(path) -> Triangulation:
    from pathlib import Path

    p = Path(path)
    return parse_triangulation(p.read_text(), name=p.stem)


@dataclass(frozen=True)
class GluingData:
    """Exponent matrices of the edge (R) and peripheral (M, L) equations.

    ``signs`` holds one +-1 per equation (edges, meridians, longitudes);
    ``edge_pi[i]`` is the integer k with R'_i log z + R''_i log(1-z) = k pi i
    at a positively oriented solution (principal logarithms).
    """

    Rp: np.ndarray
    Rpp: np.ndarray
    Mp: np.ndarray
    Mpp: np.ndarray
    Lp: np.ndarray
    Lpp: np.ndarray
    signs: tuple
    edge_pi: tuple = field(default=())

    @property
    def N(self) -> int:
        return self.Rp.shape[1]

    @property
    def h(self) -> int:
        return self.Mp.shape[0]

    @property
    def R(self) -> np.ndarray:
        return np.hstack([self.Rp, self.Rpp])

    @property
    def U(self) -> np.ndarray:
        return np.vstack(
            [self.R, np.hstack([self.Mp, self.Mpp]), np.hstack([self.Lp, self.Lpp])]
        )

    def meridian(self, i):
        return np.concatenate([self.Mp[i], self.Mpp[i]])

    def longitude(self, i):
        return np.concatenate([self.Lp[i], self.Lpp[i]])


def derive_edge_matrices(T: Triangulation) -> GluingData:
    """Edge rows from the face pairings; peripheral rows from the fixture."""
    if T.peripheral is None:
        raise TriangulationError("triangulation carries no peripheral rows")
    N = T.N
    Rp = [[0] * N for _ in range(N)]
    Rpp = [[0] * N for _ in range(N)]
    signs, edge_pi = [], []
    for i, cls in enumerate(T.edge_classes):
        per_tet: dict = {}
        for t, e in cls:
            per_tet.setdefault(t, []).append(EDGE_KIND[e])
        sign, npi = 1, 0
        for t, kinds in per_tet.items():
            (r1, r2), s, c = edge_exponents(kinds)
            Rp[i][t] += r1
            Rpp[i][t] += r2
            sign *= s
            npi += c
        signs.append(sign)
        edge_pi.append(2 - npi)
    P = T.peripheral
    return GluingData(
        int_matrix(Rp, shape=(N, N)),
        int_matrix(Rpp, shape=(N, N)),
        P.Mp,
        P.Mpp,
        P.Lp,
        P.Lpp,
        tuple(signs) + tuple(P.signs),
        tuple(edge_pi),
    )


@dataclass(frozen=True)
class NeumannComplex:
    """The chain complex 0 -> C0 -> C1 -> J -> C1 -> C0 -> 0.

    ``alpha`` is N x h (columns are images of cusps), ``beta`` is 2N x N in
    the basis (e1 of every tetrahedron, then e2 of every tetrahedron) of J,
    ``omega`` the skew form on J with <e1, e2> = 1 in each summand.
    """

    alpha: np.ndarray
    beta: np.ndarray
    omega: np.ndarray

    @property
    def beta_star(self):
        return self.beta.T.dot(self.omega)

    @property
    def alpha_star(self):
        return self.alpha.T

    @property
    def beta_in_R_basis(self):
        """beta in the basis (e1, -e2); its transpose is R = (R' R'')."""
        N = self.beta.shape[1]
        flip = np.array([1] * N + [-1] * N, dtype=object)
        return self.beta * flip[:, None]

    def is_chain_complex(self) -> bool:
        return (
            not np.any(self.beta.dot(self.alpha))
            and not np.any(self.beta_star.dot(self.beta))
            and not np.any(self.alpha_star.dot(self.beta_star))
        )

    def ranks(self) -> dict:
        r = lambda M: zlinalg.rank_and_kernel(M)[0]
        h, N = self.alpha.shape[1], self.alpha.shape[0]
        ra, rb, rbs, ras = r(self.alpha), r(self.beta), r(self.beta_star), r(self.alpha_star)
        return {
            "alpha": ra,
            "beta": rb,
            "beta_star": rbs,
            "alpha_star": ras,
            # homology ranks over Q at C0, C1, J, C1, C0
            "H_C0": h - ra,
            "H_C1": (N - rb) - ra,
            "H_J": (2 * N - rbs) - rb,
            "H_C1_dual": (N - ras) - rbs,
            "H_C0_dual": h - ras,
        }


def neumann_complex(T: Triangulation) -> NeumannComplex:
    N, h = T.N, T.h
    alpha = [[0] * h for _ in range(N)]
    beta = [[0] * N for _ in range(2 * N)]
    # e3 = -e1 - e2
    coords = {0: (1, 0), 1: (0, 1), 2: (-1, -1)}
    for i, cls in enumerate(T.edge_classes):
        t, (a, b) = cls[0]
        alpha[i][T.cusp_of(t, a)] += 1
        alpha[i][T.cusp_of(t, b)] += 1
        for t, e in cls:
            c1, c2 = coords[EDGE_KIND[e]]
            beta[t][i] += c1
            beta[N + t][i] += c2
    omega = -zlinalg.symplectic_form(N)
    return NeumannComplex(
        int_matrix(alpha, shape=(N, h)), int_matrix(beta, shape=(2 * N, N)), int_matrix(omega)
    )


@dataclass(frozen=True)
class NZReport:
    """Pass/fail for each symplectic property, with diagnostics."""

    block_identity: bool
    rank_R: bool
    rank_U: bool
    orthocomplement: bool
    offending_pairs: tuple = ()
    ranks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.block_identity and self.rank_R and self.rank_U and self.orthocomplement

    def items(self):
        return {
            "block_identity": self.block_identity,
            "rank_R": self.rank_R,
            "rank_U": self.rank_U,
            "orthocomplement": self.orthocomplement,
        }


def verify_nz_symplectic(G: GluingData) -> NZReport:
    """Exact check of U J U^t, the two ranks and the J-orthocomplement."""
    N, h = G.N, G.h
    J = zlinalg.symplectic_form(N)
    U, R = G.U, G.R
    got = U.dot(J).dot(U.T)
    want = np.zeros((N + 2 * h, N + 2 * h), dtype=object)
    want[N:, N:] = 2 * np.asarray(zlinalg.symplectic_form(h), dtype=object)
    bad = tuple(
        (i, j) for i in range(N + 2 * h) for j in range(i + 1, N + 2 * h) if got[i, j] != want[i, j]
    )
    rank_R = zlinalg.rank_and_kernel(R)[0]
    rank_U = zlinalg.rank_and_kernel(U)[0]
    # [R]^perp = {x : R J x = 0}; compare spans with [U] directly
    _, perp = zlinalg.rank_and_kernel(R.dot(J))
    perp = int_matrix(perp, shape=(len(perp), 2 * N))
    both = zlinalg.rank_and_kernel(np.vstack([U, perp]))[0]
    ortho = both == rank_U == perp.shape[0]
    return NZReport(
        block_identity=not bad,
        rank_R=rank_R == N - h,
        rank_U=rank_U == N + h,
        orthocomplement=ortho,
        offending_pairs=bad,
        ranks={"R": rank_R, "U": rank_U, "perp": perp.shape[0]},
    )


def nz_half_symplectic(G: GluingData, slopes=None):
    """The half-symplectic matrix H = (A B) of the gluing equations.

    Rows are a Z-basis of the edge-row lattice followed by one peripheral row
    per cusp, ``p*meridian + q*longitude`` for ``slopes[i] = (p, q)``
    (default: the meridian).  Rows are converted to the convention
    ``prod z^A = +-prod (1-z)^B``, i.e. A = R', B = -R''.  Returns
    ``(H, signs)`` with the sign of each row inherited from the data, or
    None for rows created by saturating the row lattice.
    """
    N, h = G.N, G.h
    slopes = slopes or [(1, 0)] * h
    basis, coeffs = zlinalg.row_lattice_basis(G.R)
    if basis.shape[0] != N - h:
        raise TriangulationError(f"edge rows have rank {basis.shape[0]}, expected {N - h}")
    edge_signs = G.signs[:N]
    rows, signs = [], []
    for r, c in zip(basis.tolist(), coeffs.tolist()):
        rows.append(r)
        signs.append(int(np.prod([edge_signs[k] ** (abs(ck) % 2) for k, ck in enumerate(c)])))
    for i, (p, q) in enumerate(slopes):
        if np.gcd(int(p), int(q)) != 1:
            raise TriangulationError(f"slope {(p, q)} is not primitive")
        row = p * G.meridian(i) + q * G.longitude(i)
        rows.append(list(row))
        sm, sl = G.signs[N + i], G.signs[N + h + i]
        signs.append(sm ** (abs(p) % 2) * sl ** (abs(q) % 2))
    H = np.array(rows, dtype=object)
    H[:, N:] = -H[:, N:]
    H = int_matrix(H, shape=(N, 2 * N))
    # a peripheral row can be divisible by 2 modulo the edge rows; pass to
    # the saturated lattice, whose new rows carry no sign from the data
    H, T = zlinalg.saturate(H)
    unit = [sum(x != 0 for x in row) == 1 and max(row) == 1 for row in T]
    signs = [sg if u and T[i][i] == 1 else None for i, (sg, u) in enumerate(zip(signs, unit))]
    return H, tuple(signs)
