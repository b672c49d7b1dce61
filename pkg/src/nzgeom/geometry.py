"""Hyperbolic structures from gluing equations.

The solver works in logarithmic coordinates: the unknowns are u_j = log z_j,
v_j = log(1 - z_j) is recomputed on the principal branch, and every equation
is affine in (u, v).  Cusp coordinates are tracked log differences from the
complete structure, so a filled or deformed solve always needs the complete
solution as its base.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import zlinalg
from .dilogarithm import LoggedPoint, PrecisionContext, bloch_wigner
from .triangulation import GluingData

__all__ = [
    "SolverError",
    "SlopeTooSmall",
    "ShapeAssignment",
    "DehnFilling",
    "CuspCoordinates",
    "PotentialSample",
    "AsymptoticsRow",
    "AsymptoticsReport",
    "solve_complete",
    "solve_filled",
    "solve_deformed",
    "cusp_coordinates",
    "cusp_log_holonomies",
    "tracked_cusp_coordinates",
    "dv_du",
    "dv_du_numeric",
    "volume",
    "edge_angle_sums",
    "quadratic_form",
    "core_length",
    "filling_asymptotics",
    "potential_scan",
    "orientation_sign",
    "complex_volume",
]

MAX_ITER = 100
MAX_HALVINGS = 8
CONTINUATION_STEPS = 8
DEGENERATE = 1e-12


class SolverError(RuntimeError):
    pass


class SlopeTooSmall(SolverError):
    pass


def _ctx(ctx):
    return PrecisionContext() if ctx is None else ctx


@dataclass(frozen=True)
class ShapeAssignment:
    z: tuple
    logs: tuple  # LoggedPoints
    base: "ShapeAssignment | None" = None
    iterations: int = 0
    residual: float = 0.0

    @property
    def N(self) -> int:
        return len(self.z)

    @property
    def u(self):
        return [p.u for p in self.logs]

    @property
    def v(self):
        return [p.v for p in self.logs]

    @classmethod
    def from_u(cls, u, base=None, iterations=0, residual=0.0):
        B = _FP if all(isinstance(x, complex) for x in u) else _MP
        z = tuple(B.exp(x) for x in u)
        logs = tuple(LoggedPoint(x, B.log(1 - zz)) for x, zz in zip(u, z))
        return cls(z, logs, base, iterations, residual)

    @classmethod
    def from_z(cls, z, base=None):
        return cls.from_u([mpmath.log(mpmath.mpc(x)) for x in z], base)


@dataclass(frozen=True)
class DehnFilling:
    """Per-cusp slopes; ``None`` marks an unfilled cusp."""

    slopes: tuple

    def __post_init__(self):
        for s in self.slopes:
            if s is None:
                continue
            p, q = s
            if p == 0 and q == 0:
                raise ValueError("slope (0, 0)")
            if float(p).is_integer() and float(q).is_integer() and math.gcd(int(p), int(q)) != 1:
                raise ValueError(f"integer slope {s} is not coprime")

    @classmethod
    def unfilled(cls, h):
        return cls((None,) * h)

    @classmethod
    def parse(cls, items):
        out = []
        for it in items:
            if it in (None, "inf", "oo", "∞"):
                out.append(None)
            elif isinstance(it, str):
                p, q = it.split(",")
                out.append((_num(p), _num(q)))
            else:
                out.append(tuple(it))
        return cls(tuple(out))

    @property
    def is_integral(self):
        return all(s is None or (float(s[0]).is_integer() and float(s[1]).is_integer()) for s in self.slopes)


def _num(s):
    x = float(s)
    return int(x) if x.is_integer() else x


@dataclass(frozen=True)
class CuspCoordinates:
    u: tuple
    v: tuple
    tau: tuple  # cusp shapes, Im > 0
    dvdu: tuple = ()  # holonomy derivatives dv_i/du_i


# ---------------------------------------------------------------------------
# the Newton system


def _edge_row_choice(G: GluingData):
    """Greedy choice of N - h independent edge equations."""
    return _edge_rows(tuple(tuple(int(x) for x in row) for row in G.R.tolist()), G.h)


@functools.lru_cache(maxsize=64)
def _edge_rows(R, h):
    R = zlinalg.int_matrix(R)
    chosen = []
    rank = 0
    for i in range(R.shape[0]):
        trial = R[chosen + [i]]
        r = zlinalg.rank_and_kernel(trial)[0]
        if r > rank:
            chosen.append(i)
            rank = r
    if rank != R.shape[0] - h:
        raise SolverError(f"edge equations have rank {rank}, expected {R.shape[0] - h}")
    return tuple(chosen)


class _MP:
    """Arbitrary precision arithmetic (mpmath at the ambient precision)."""

    exp = staticmethod(mpmath.exp)
    log = staticmethod(mpmath.log)
    fsum = staticmethod(mpmath.fsum)
    nint = staticmethod(mpmath.nint)

    @staticmethod
    def pi():
        return mpmath.pi

    @staticmethod
    def cplx(x):
        return mpmath.mpc(x)

    @staticmethod
    def one_minus_exp(x):
        return -mpmath.expm1(x)

    @staticmethod
    def solve(J, rhs):
        """Solve J X = rhs for a list of right-hand sides."""
        try:
            A = mpmath.matrix(J)
            return [list(mpmath.lu_solve(A, mpmath.matrix(r))) for r in rhs]
        except ZeroDivisionError:
            raise SolverError("singular Jacobian") from None


class _FP:
    """Double precision arithmetic, used when at most 15 digits are asked for."""

    exp = staticmethod(cmath.exp)
    log = staticmethod(cmath.log)
    fsum = staticmethod(sum)

    @staticmethod
    def nint(x):
        return float(round(x))

    @staticmethod
    def pi():
        return math.pi

    @staticmethod
    def cplx(x):
        return complex(x)

    @staticmethod
    def one_minus_exp(x):
        return 1 - cmath.exp(x)

    @staticmethod
    def solve(J, rhs):
        A = np.array(J, dtype=complex)
        if not np.all(np.isfinite(A)) or np.linalg.cond(A) > 1e14:
            raise SolverError("singular Jacobian")
        X = np.linalg.solve(A, np.array(rhs, dtype=complex).T)
        return [list(col) for col in X.T]


def _backend(ctx):
    return _FP if ctx.digits <= 15 else _MP


class _System:
    """Equations a.u + b.v = c; rows flagged ``mod`` are taken modulo 2 pi i."""

    def __init__(self, G: GluingData, B=_MP):
        self.G = G
        self.N = G.N
        self.B = B
        self.a, self.b, self.c, self.mod = [], [], [], []
        pi_i = B.cplx(1j) * B.pi()
        for i in _edge_row_choice(G):
            self.add([int(x) for x in G.Rp[i]], [int(x) for x in G.Rpp[i]], pi_i * G.edge_pi[i])

    def add(self, a, b, c, mod=False):
        self.a.append(list(a))
        self.b.append(list(b))
        self.c.append(self.B.cplx(c))
        self.mod.append(mod)

    def residual(self, u, v):
        B = self.B
        out = []
        two_pi = 2 * B.pi()
        for a, b, c, m in zip(self.a, self.b, self.c, self.mod):
            r = B.fsum(x * y for x, y in zip(a, u) if x) + B.fsum(x * y for x, y in zip(b, v) if x) - c
            if m:
                r -= 1j * two_pi * B.nint(r.imag / two_pi)
            out.append(r)
        return out

    def jacobian(self, u):
        B = self.B
        d = []
        for x in u:
            z = B.exp(x)
            d.append(-z / (1 - z))
        return [[a[j] + b[j] * d[j] for j in range(self.N)] for a, b in zip(self.a, self.b)]


def _vlog(u, B):
    return [B.log(B.one_minus_exp(x)) for x in u]


def _norm(r):
    return max((abs(x) for x in r), default=0)


def _newton(system: _System, u0, ctx: PrecisionContext):
    B = system.B
    tol = 10.0 ** (4 - ctx.digits) if B is _FP else mpmath.mpf(10) ** (4 - ctx.digits)
    u = [B.cplx(x) for x in u0]
    F = system.residual(u, _vlog(u, B))
    nf = _norm(F)
    for it in range(MAX_ITER + 1):
        if nf < tol:
            return u, it, nf
        if it == MAX_ITER:
            break
        du = B.solve(system.jacobian(u), [[-x for x in F]])[0]
        step = 1.0
        degenerate = False
        for _ in range(MAX_HALVINGS + 1):
            cand = [x + step * du[j] for j, x in enumerate(u)]
            zs = [B.exp(x) for x in cand]
            if any(abs(z) < DEGENERATE or abs(1 - z) < DEGENERATE for z in zs):
                degenerate = True
                step /= 2
                continue
            Fc = system.residual(cand, _vlog(cand, B))
            nc = _norm(Fc)
            if nc < nf:
                u, F, nf = cand, Fc, nc
                break
            step /= 2
        else:
            if degenerate:
                raise SolverError("shape degenerating to 0 or 1")
            raise SolverError(f"damped Newton stalled at residual {float(nf):.3g}")
    raise SolverError(f"no convergence after {MAX_ITER} iterations (residual {float(nf):.3g})")


def _initial(G, init):
    if init is None:
        return [mpmath.mpc(0, mpmath.pi / 2)] * G.N
    if isinstance(init, ShapeAssignment):
        return list(init.u)
    return [mpmath.log(mpmath.mpc(z)) for z in init]


def solve_complete(G: GluingData, init=None, ctx=None) -> ShapeAssignment:
    """Edge equations plus one meridian equation per cusp (holonomy 1)."""
    ctx = _ctx(ctx)
    with ctx.workdps():
        system = _System(G, _backend(ctx))
        for i in range(G.h):
            sign = G.signs[G.N + i]
            c = mpmath.mpc(0, mpmath.pi) if sign == -1 else mpmath.mpc(0)
            system.add([int(x) for x in G.Mp[i]], [int(x) for x in G.Mpp[i]], c, mod=True)
        u, it, res = _newton(system, _initial(G, init), ctx)
        s = ShapeAssignment.from_u(u, None, it, res)
    return s


def _cusp_rows(G, i, p, q):
    a = [p * int(x) + q * int(y) for x, y in zip(G.Mp[i], G.Lp[i])]
    b = [p * int(x) + q * int(y) for x, y in zip(G.Mpp[i], G.Lpp[i])]
    return a, b


def _affine_system(G, base: ShapeAssignment, targets, B=_MP):
    """targets[i] = (p, q, c): p u_i + q v_i = c in tracked cusp coordinates."""
    system = _System(G, B)
    u0, v0 = base.u, base.v
    for i, (p, q, c) in enumerate(targets):
        a, b = _cusp_rows(G, i, p, q)
        off = mpmath.fsum(x * y for x, y in zip(a, u0)) + mpmath.fsum(x * y for x, y in zip(b, v0))
        system.add(a, b, c + off)
    return system


def _solve_along(G, base, make_targets, seed, ctx, steps):
    u = list(seed.u if seed is not None else base.u)
    it_total, res = 0, 0
    for t in steps:
        system = _affine_system(G, base, make_targets(t), _backend(ctx))
        u, it, res = _newton(system, u, ctx)
        it_total += it
    return ShapeAssignment.from_u(u, base, it_total, res)


def solve_filled(G: GluingData, kappa, base: ShapeAssignment | None = None, seed=None, ctx=None):
    """Solve p_i u_i + q_i v_i = 2 pi i on filled cusps, u_i = 0 on the others.

    ``base`` is the complete structure (computed if missing).  Unless a seed
    is given, the solution is path-followed from the complete structure by
    scaling the right-hand side through 2^-7, ..., 1.
    """
    ctx = _ctx(ctx)
    if not isinstance(kappa, DehnFilling):
        kappa = DehnFilling.parse(kappa)
    if len(kappa.slopes) != G.h:
        raise ValueError(f"need {G.h} slopes, got {len(kappa.slopes)}")
    if base is None:
        base = solve_complete(G, ctx=ctx)
    if all(s is None for s in kappa.slopes):
        return ShapeAssignment(base.z, base.logs, base, 0, base.residual)
    with ctx.workdps():
        two_pi_i = mpmath.mpc(0, 2 * mpmath.pi)

        def targets(t):
            return [(1, 0, 0) if s is None else (s[0], s[1], two_pi_i * t) for s in kappa.slopes]

        if seed is not None:
            steps = [1]
        else:
            steps = [mpmath.mpf(2) ** (k - CONTINUATION_STEPS + 1) for k in range(CONTINUATION_STEPS)]
        try:
            return _solve_along(G, base, targets, seed, ctx, steps)
        except SolverError as exc:
            raise SlopeTooSmall(f"slope {kappa.slopes} left the branch neighbourhood: {exc}") from exc


def solve_deformed(G: GluingData, u_cusp, base: ShapeAssignment, seed=None, ctx=None):
    """Solve the edge equations with the cusp coordinates u_i prescribed."""
    ctx = _ctx(ctx)
    B = _backend(ctx)
    with ctx.workdps():
        u_cusp = [B.cplx(x) for x in u_cusp]
        if seed is not None:
            steps = [1]
        else:
            steps = [mpmath.mpf(k + 1) / 4 for k in range(4)]
        return _solve_along(G, base, lambda t: [(1, 0, t * x) for x in u_cusp], seed, ctx, steps)


# ---------------------------------------------------------------------------
# invariants of a solution


def cusp_log_holonomies(s: ShapeAssignment, G: GluingData, ctx=None):
    """(u_i, v_i) from principal logs of z/z0 and (1-z)/(1-z0)."""
    if s.base is None:
        raise ValueError("shape assignment has no base (complete) solution")
    with _ctx(ctx).workdps():
        du = [mpmath.log(z / z0) for z, z0 in zip(s.z, s.base.z)]
        dv = [mpmath.log((1 - z) / (1 - z0)) for z, z0 in zip(s.z, s.base.z)]
        if any(abs(x) > 1 for x in du + dv):
            raise ValueError("deformation too large for principal logarithms")
        u = [
            mpmath.fsum(int(a) * x for a, x in zip(G.Mp[i], du)) + mpmath.fsum(int(b) * y for b, y in zip(G.Mpp[i], dv))
            for i in range(G.h)
        ]
        v = [
            mpmath.fsum(int(a) * x for a, x in zip(G.Lp[i], du)) + mpmath.fsum(int(b) * y for b, y in zip(G.Lpp[i], dv))
            for i in range(G.h)
        ]
    return u, v


def dv_du(G: GluingData, s: ShapeAssignment, ctx=None):
    """Jacobian dv_i/du_k of the cusp coordinates, by implicit differentiation."""
    ctx = _ctx(ctx)
    B = _backend(ctx)
    base = s.base if s.base is not None else s
    with ctx.workdps():
        system = _affine_system(G, base, [(1, 0, 0)] * G.h, B)
        J = system.jacobian([B.cplx(x) for x in s.u])
        d = [-B.cplx(z) / (1 - B.cplx(z)) for z in s.z]
        rhs = []
        for k in range(G.h):
            col = [0] * G.N
            col[G.N - G.h + k] = 1
            rhs.append(col)
        cols = B.solve(J, rhs)
        out = mpmath.matrix(G.h, G.h)
        for i in range(G.h):
            for k in range(G.h):
                out[i, k] = B.fsum((int(G.Lp[i][j]) + int(G.Lpp[i][j]) * d[j]) * cols[k][j] for j in range(G.N))
    return out


def dv_du_numeric(G: GluingData, base: ShapeAssignment, ctx=None, step=1e-4):
    """dv_i/du_k at the complete structure by central differences.

    One Richardson step (h and h/2) removes the O(h^2) term.
    """
    ctx = _ctx(ctx)
    out = mpmath.matrix(G.h, G.h)
    with ctx.workdps():
        for k in range(G.h):

            def central(hh):
                vals = []
                for sgn in (1, -1):
                    uc = [0] * G.h
                    uc[k] = sgn * mpmath.mpf(hh)
                    sol = solve_deformed(G, uc, base, seed=base, ctx=ctx)
                    vals.append(cusp_log_holonomies(sol, G, ctx)[1])
                return [(a - b) / (2 * mpmath.mpf(hh)) for a, b in zip(*vals)]

            d1, d2 = central(step), central(step / 2)
            for i in range(G.h):
                out[i, k] = (4 * d2[i] - d1[i]) / 3
    return out


def cusp_coordinates(s: ShapeAssignment, G: GluingData, ctx=None, step=1e-4) -> CuspCoordinates:
    """u, v of ``s`` together with the cusp shapes of the complete structure.

    ``dvdu`` holds dv_i/du_i (finite differences).  The Euclidean cusp shape
    tau = longitude/meridian, normalised to the upper half-plane, is its
    complex conjugate: the cusp torus seen from the cusp has the opposite
    orientation to the one seen from inside the manifold.
    """
    ctx = _ctx(ctx)
    base = s.base if s.base is not None else s
    if s.base is None:
        s = ShapeAssignment(s.z, s.logs, base)
    u, v = cusp_log_holonomies(s, G, ctx)
    D = dv_du_numeric(G, base, ctx, step)
    diag = tuple(D[i, i] for i in range(G.h))
    return CuspCoordinates(tuple(u), tuple(v), tuple(mpmath.conj(d) for d in diag), diag)


def volume(s: ShapeAssignment, ctx=None):
    return mpmath.fsum(bloch_wigner(z, ctx) for z in s.z)


def edge_angle_sums(G: GluingData, s: ShapeAssignment, ctx=None):
    """Sum of dihedral angles (args of z, z', z'') around every edge."""
    with _ctx(ctx).workdps():
        out = []
        for i in range(G.N):
            val = mpmath.fsum(int(a) * p.u + int(b) * p.v for a, b, p in zip(G.Rp[i], G.Rpp[i], s.logs))
            out.append(val.imag + mpmath.pi * (2 - G.edge_pi[i]))
        return out


def quadratic_form(tau, p, q):
    """Q(p, q) = |p tau + q|^2 / Im tau."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("need Im tau > 0")
    return abs(p * tau + q) ** 2 / tau.imag


def _xgcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _xgcd(b, a % b)
    return g, y, x - (a // b) * y


def core_length(s: ShapeAssignment, G: GluingData, kappa, ctx=None):
    """Real length of the core geodesic of every filled cusp (0 if unfilled).

    For integral slopes L = |Re(r u + s v)| with p s - q r = 1; for real
    slopes the real completion (-q, p)/(p^2 + q^2) is used.
    """
    if not isinstance(kappa, DehnFilling):
        kappa = DehnFilling.parse(kappa)
    u, v = tracked_cusp_coordinates(G, s)
    out = []
    with _ctx(ctx).workdps():
        for i, sl in enumerate(kappa.slopes):
            if sl is None:
                out.append(mpmath.mpf(0))
                continue
            p, q = sl
            if float(p).is_integer() and float(q).is_integer():
                g, x, y = _xgcd(int(p), int(q))
                if g != 1:
                    raise ValueError(f"slope {sl} has no integral completion")
                r, s_ = -y, x  # p*x + q*y = 1
                out.append(abs((r * u[i] + s_ * v[i]).real))
            else:
                out.append(abs((-q * u[i] + p * v[i]).real) / (p * p + q * q))
    return out


def _real_slope(u, v):
    """Real (p, q) with p u + q v = 2 pi i."""
    M = np.array([[float(u.real), float(v.real)], [float(u.imag), float(v.imag)]])
    p, q = np.linalg.solve(M, [0.0, 2 * math.pi])
    return p, q


# ---------------------------------------------------------------------------
# filling asymptotics


@dataclass(frozen=True)
class AsymptoticsRow:
    slope: tuple
    volume: float
    Q: float
    L: float
    residual_volume_Q: float  # Vol(M) - Vol(M_k) - pi^2/Q
    residual_volume_L: float  # Vol(M) - Vol(M_k) - pi L/2
    residual_length: float  # L - 2 pi/Q
    error: str = ""


@dataclass(frozen=True)
class AsymptoticsReport:
    volume_complete: float
    tau: complex
    rows: tuple
    exponents: dict = field(default_factory=dict)

    @property
    def converged(self):
        return [r for r in self.rows if not r.error]


def _decay_exponent(rows, attr):
    xs, ys = [], []
    for r in rows:
        val = abs(getattr(r, attr))
        if val > 0:
            p, q = r.slope
            # scale (p^4 + q^4)^(1/4), so O(1/(p^4+q^4)) means exponent 4
            xs.append(math.log((p**4 + q**4) ** 0.25))
            ys.append(math.log(val))
    if len(xs) < 2:
        return float("nan")
    slope = np.polyfit(xs, ys, 1)[0]
    return -float(slope)


def filling_asymptotics(G: GluingData, slopes, ctx=None) -> AsymptoticsReport:
    """Compare filled volumes and core lengths with the leading asymptotics.

    Slopes (p, q) denote p mu + q lambda, filled by p u + q v = 2 pi i.  The
    cusp form is quadratic_form(tau_lattice, p, q) where tau_lattice is the
    meridian/longitude ratio 1/conj(tau) of the cusp shape tau, normalised to
    the upper half-plane; this equals |p + q tau|^2 / Im tau.
    """
    if G.h != 1:
        raise ValueError("filling asymptotics need a one-cusped manifold")
    ctx = _ctx(ctx)
    base = solve_complete(G, ctx=ctx)
    vol0 = float(volume(base, ctx))
    tau = complex(cusp_coordinates(base, G, ctx).tau[0])
    tau_lattice = 1 / tau.conjugate()
    rows = []
    for sl in slopes:
        sl = tuple(sl)
        Q = quadratic_form(tau_lattice, sl[0], sl[1])
        try:
            s = solve_filled(G, DehnFilling((sl,)), base, ctx=ctx)
            vol = float(volume(s, ctx))
            L = float(core_length(s, G, DehnFilling((sl,)), ctx)[0])
        except (SolverError, ValueError) as exc:
            rows.append(AsymptoticsRow(sl, math.nan, Q, math.nan, math.nan, math.nan, math.nan, str(exc)))
            continue
        d = vol0 - vol
        rows.append(
            AsymptoticsRow(sl, vol, Q, L, d - math.pi**2 / Q, d - math.pi * L / 2, L - 2 * math.pi / Q)
        )
    good = [r for r in rows if not r.error]
    exps = {k: _decay_exponent(good, k) for k in ("residual_volume_Q", "residual_volume_L", "residual_length")}
    return AsymptoticsReport(vol0, tau, tuple(rows), exps)


# ---------------------------------------------------------------------------
# potential function


@dataclass(frozen=True)
class PotentialSample:
    u: tuple  # grid points (tuples of h complex numbers)
    v: tuple
    f: tuple
    eps: tuple  # +-Im f, see orientation_sign
    vol: tuple
    L: tuple
    identity_residual: tuple  # Vol(u) - Vol(M) + (pi/2) sum L - Im f
    quadrature_error: tuple  # |f(1 segment) - f(2 segments)|
    vol_complete: float = 0.0


_GL_NODES = 32


def _radial_f(G, base, ucusp, ctx, segments):
    """f(u) = 1/4 int_0^1 (v . u - t u . dv/dt) dt along t -> t u."""
    B = _backend(ctx)
    real = float if B is _FP else mpmath.mpf
    ucusp = [B.cplx(c) for c in ucusp]
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    total = B.cplx(0)
    seed = base
    last = None
    for sgm in range(segments):
        a, b = real(sgm) / segments, real(sgm + 1) / segments
        for xi, wi in zip(x, w):
            t = (a + b) / 2 + (b - a) / 2 * real(xi)
            sol = solve_deformed(G, [t * c for c in ucusp], base, seed=seed, ctx=ctx)
            seed = sol
            vv = _cusp_v(G, sol)
            D = dv_du(G, sol, ctx)
            dvdt = [B.fsum(B.cplx(D[i, k]) * ucusp[k] for k in range(G.h)) for i in range(G.h)]
            integrand = B.fsum(vv[i] * ucusp[i] - t * ucusp[i] * dvdt[i] for i in range(G.h))
            total += (b - a) / 2 * real(wi) * integrand
            last = sol
    return total / 4, last


def tracked_cusp_coordinates(G: GluingData, sol: ShapeAssignment):
    """(u_i, v_i) from the solver's continuously tracked logarithms."""
    base = sol.base if sol.base is not None else sol
    du = [x - y for x, y in zip(sol.u, base.u)]
    dv = [x - y for x, y in zip(sol.v, base.v)]

    def comb(P, PP, i):
        return mpmath.fsum(int(a) * x for a, x in zip(P[i], du)) + mpmath.fsum(int(b) * y for b, y in zip(PP[i], dv))

    return [comb(G.Mp, G.Mpp, i) for i in range(G.h)], [comb(G.Lp, G.Lpp, i) for i in range(G.h)]


def _cusp_v(G, sol):
    return tracked_cusp_coordinates(G, sol)[1]


def orientation_sign(G: GluingData, base: ShapeAssignment, ctx=None) -> int:
    """+1 if Im dv/du > 0 at the complete structure, else -1.

    The volume correction is Im f in the orientation where the holonomy
    derivative lies in the upper half-plane; reversing the orientation
    conjugates f.
    """
    D = dv_du(G, base, ctx)
    signs = {1 if D[i, i].imag > 0 else -1 for i in range(G.h)}
    if len(signs) != 1:
        raise ValueError("cusps disagree about the orientation")
    return signs.pop()


def potential_scan(G: GluingData, u_grid, base=None, ctx=None) -> PotentialSample:
    """Evaluate v(u), f(u), Vol(u), L(u) and the volume identity on a grid."""
    ctx = _ctx(ctx)
    if base is None:
        base = solve_complete(G, ctx=ctx)
    vol0 = volume(base, ctx)
    cols = {k: [] for k in ("u", "v", "f", "eps", "vol", "L", "res", "qerr")}
    sigma = orientation_sign(G, base, ctx)
    with ctx.workdps():
        for ucusp in u_grid:
            ucusp = [mpmath.mpc(c) for c in ucusp]
            if all(c == 0 for c in ucusp):
                f1 = f2 = mpmath.mpc(0)
                sol = ShapeAssignment(base.z, base.logs, base)
            else:
                f1, _ = _radial_f(G, base, ucusp, ctx, 1)
                f2, last = _radial_f(G, base, ucusp, ctx, 2)
                # Gauss nodes stop short of t = 1
                sol = solve_deformed(G, ucusp, base, seed=last, ctx=ctx)
            vv = _cusp_v(G, sol)
            Ls = []
            for i in range(G.h):
                if ucusp[i] == 0:
                    Ls.append(mpmath.mpf(0))
                    continue
                p, q = _real_slope(ucusp[i], vv[i])
                Ls.append(abs((-q * ucusp[i] + p * vv[i]).real) / (p * p + q * q))
            vol = volume(sol, ctx)
            cols["u"].append(tuple(complex(c) for c in ucusp))
            cols["v"].append(tuple(complex(c) for c in vv))
            cols["f"].append(complex(f2))
            eps = sigma * f2.imag
            cols["eps"].append(float(eps))
            cols["vol"].append(float(vol))
            cols["L"].append(tuple(float(x) for x in Ls))
            cols["res"].append(float(vol - vol0 + mpmath.pi / 2 * mpmath.fsum(Ls) - eps))
            cols["qerr"].append(float(abs(f1 - f2)))
    return PotentialSample(
        tuple(cols["u"]),
        tuple(cols["v"]),
        tuple(cols["f"]),
        tuple(cols["eps"]),
        tuple(cols["vol"]),
        tuple(cols["L"]),
        tuple(cols["res"]),
        tuple(cols["qerr"]),
        float(vol0),
    )


def complex_volume(s: ShapeAssignment, H=None, G: GluingData | None = None, ctx=None):
    """Extended regulator of the element attached to (H, s), mod 4 pi^2.

    Without an explicit half-symplectic pair, H is built from ``G`` with the
    meridian (complete) row per cusp.
    """
    from . import bloch

    if H is None:
        if G is None:
            raise ValueError("need a half-symplectic pair or gluing data")
        P = bloch.pair_from_gluing(G, s)
    elif isinstance(H, bloch.HalfSymplecticPair):
        P = H
    else:
        P = bloch.HalfSymplecticPair(H, tuple(s.logs))
    return bloch.regulator(bloch.extended_element(P, ctx=ctx), ctx=ctx)
