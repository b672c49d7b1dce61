"""Exact q-series, Nahm sums and the arithmetic checks around them.

q-series are truncated Laurent-Puiseux series with exact rational
coefficients.  A series with denominator k stores the coefficients of
q^(c + i/k) for i = 0 .. k*order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .bloch import HalfSymplecticPair, verify_eq18
from .dilogarithm import LoggedPoint, PrecisionContext
from .zlinalg import identity, int_matrix, zeros

__all__ = [
    "QSeries",
    "pochhammer",
    "NahmData",
    "nahm_sum",
    "nahm_solve",
    "nahm_residual",
    "NahmParityError",
    "nahm_to_halfsymplectic",
    "kronecker",
    "is_fundamental_discriminant",
    "ZetaValue",
    "zeta_quadratic",
    "zeta_quadratic_hurwitz",
    "recognize_rational",
]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class QSeries:
    """sum_i coeffs[i] q^(lead + i/denom), known up to q^(lead + order)."""

    lead: Fraction
    coeffs: tuple
    order: int
    denom: int = 1

    def __post_init__(self):
        object.__setattr__(self, "lead", _frac(self.lead))
        n = self.denom * self.order + 1
        c = tuple(_frac(x) for x in self.coeffs[:n])
        object.__setattr__(self, "coeffs", c + (Fraction(0),) * (n - len(c)))

    @classmethod
    def one(cls, order, denom=1):
        return cls(Fraction(0), (1,), order, denom)

    @classmethod
    def monomial(cls, exponent, order, coeff=1):
        e = _frac(exponent)
        return cls(e, (coeff,), order, 1)

    def coefficient(self, exponent) -> Fraction:
        """Coefficient of q^exponent; raises if beyond the truncation."""
        k = (_frac(exponent) - self.lead) * self.denom
        if k.denominator != 1 or k < 0:
            return Fraction(0)
        if k > self.denom * self.order:
            raise ValueError(f"q^{exponent} is beyond the truncation order")
        return self.coeffs[int(k)]

    def integer_coefficients(self):
        """Coefficients of q^(lead + i), i = 0..order (denominator 1 only)."""
        if self.denom != 1:
            raise ValueError("series has fractional exponents")
        if any(c.denominator != 1 for c in self.coeffs):
            raise ValueError("series has non-integral coefficients")
        return [int(c) for c in self.coeffs]

    def _refine(self, k):
        """Same series with denominator k (a multiple of self.denom)."""
        if k % self.denom:
            raise ValueError("not a refinement")
        step = k // self.denom
        out = [Fraction(0)] * (k * self.order + 1)
        for i, c in enumerate(self.coeffs):
            out[i * step] = c
        return QSeries(self.lead, tuple(out), self.order, k)

    def _common(self, other):
        k = math.lcm(self.denom, other.denom)
        d = other.lead - self.lead
        k = math.lcm(k, d.denominator)
        return self._refine(k), other._refine(k)

    def __add__(self, other):
        a, b = self._common(other)
        lead = min(a.lead, b.lead)
        order_end = min(a.lead + a.order, b.lead + b.order)
        k = a.denom
        n = int((order_end - lead) * k)
        out = [Fraction(0)] * (n + 1)
        for s in (a, b):
            off = int((s.lead - lead) * k)
            for i, c in enumerate(s.coeffs):
                if off + i <= n:
                    out[off + i] += c
        order = order_end - lead
        if order.denominator != 1:
            raise ValueError("truncation orders are incompatible")
        return QSeries(lead, tuple(out), int(order), k)

    def __neg__(self):
        return QSeries(self.lead, tuple(-c for c in self.coeffs), self.order, self.denom)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return QSeries(self.lead, tuple(c * _frac(other) for c in self.coeffs), self.order, self.denom)
        a, b = self._common(other)
        k = a.denom
        order = min(a.order, b.order)
        n = k * order
        out = [Fraction(0)] * (n + 1)
        for i, x in enumerate(a.coeffs[: n + 1]):
            if x:
                for j, y in enumerate(b.coeffs[: n + 1 - i]):
                    if y:
                        out[i + j] += x * y
        return QSeries(a.lead + b.lead, tuple(out), order, k)

    __rmul__ = __mul__

    def inverse(self):
        """1/f for f with leading coefficient a unit (nonzero rational)."""
        a0 = self.coeffs[0]
        if a0 == 0:
            raise ZeroDivisionError("leading coefficient is zero")
        n = len(self.coeffs)
        inv = [Fraction(0)] * n
        inv[0] = 1 / a0
        for m in range(1, n):
            s = sum((self.coeffs[i] * inv[m - i] for i in range(1, m + 1) if self.coeffs[i]), Fraction(0))
            inv[m] = -s / a0
        return QSeries(-self.lead, tuple(inv), self.order, self.denom)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        a, b = self._common(other)
        if a.order != b.order:
            return False
        lead = min(a.lead, b.lead)
        return all(a.coefficient(lead + Fraction(i, a.denom)) == b.coefficient(lead + Fraction(i, a.denom))
                   for i in range(a.denom * a.order + 1))

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                e = self.lead + Fraction(i, self.denom)
                terms.append(f"{c}*q^{e}")
        return " + ".join(terms or ["0"]) + f" + O(q^{self.lead + self.order + Fraction(1, self.denom)})"


def _poch_ints(n, length, step=1):
    """Integer coefficients of (q)_n with q = x^step, truncated to `length` terms."""
    out = [0] * length
    out[0] = 1
    for k in range(1, n + 1):
        e = k * step
        if e >= length:
            break
        for i in range(length - 1, e - 1, -1):
            out[i] -= out[i - e]
    return out


def pochhammer(n: int, order: int) -> QSeries:
    """(q)_n = (1 - q)(1 - q^2)...(1 - q^n), exactly, up to q^order."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return QSeries(Fraction(0), tuple(_poch_ints(n, order + 1)), order)


@dataclass(frozen=True)
class NahmData:
    A: tuple
    b: tuple
    c: Fraction = Fraction(0)

    def __post_init__(self):
        A = tuple(tuple(_frac(x) for x in row) for row in np.atleast_2d(np.array(self.A, dtype=object)).tolist())
        N = len(A)
        if any(len(r) != N for r in A):
            raise ValueError("A must be square")
        if any(A[i][j] != A[j][i] for i in range(N) for j in range(N)):
            raise ValueError("A must be symmetric")
        b = tuple(_frac(x) for x in (self.b if np.ndim(self.b) else [self.b] * N))
        if len(b) != N:
            raise ValueError("b has the wrong length")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", _frac(self.c))
        for k in range(1, N + 1):
            if _det([row[:k] for row in A[:k]]) <= 0:
                raise ValueError("A is not positive definite")

    @property
    def N(self):
        return len(self.A)

    def exponent(self, n):
        N = self.N
        q = sum(self.A[i][j] * n[i] * n[j] for i in range(N) for j in range(N)) / 2
        return q + sum(bi * ni for bi, ni in zip(self.b, n)) + self.c


def _det(M):
    """Exact determinant by fraction-free elimination on Fractions."""
    M = [list(map(Fraction, r)) for r in M]
    n, d = len(M), Fraction(1)
    for i in range(n):
        p = next((r for r in range(i, n) if M[r][i] != 0), None)
        if p is None:
            return Fraction(0)
        if p != i:
            M[i], M[p] = M[p], M[i]
            d = -d
        d *= M[i][i]
        for r in range(i + 1, n):
            f = M[r][i] / M[i][i]
            for c in range(i, n):
                M[r][c] -= f * M[i][c]
    return d


def _lattice_points(d: NahmData, order):
    """All n >= 0 with n^t A n / 2 + b^t n <= order."""
    N = d.N
    Af = np.array([[float(x) for x in r] for r in d.A])
    lam = float(np.linalg.eigvalsh(Af)[0]) * (1 - 1e-9)
    bn = math.sqrt(sum(float(x) ** 2 for x in d.b))
    radius = (bn + math.sqrt(bn * bn + 2 * lam * order)) / lam
    R = int(radius) + 1
    bound = Fraction(order) + d.c
    out = []

    def rec(prefix):
        if len(prefix) == N:
            if d.exponent(prefix) <= bound:
                out.append(tuple(prefix))
            return
        for k in range(R + 1):
            if sum(x * x for x in prefix) + k * k > radius * radius + 1e-9:
                break
            rec(prefix + [k])

    rec([])
    return out


def nahm_sum(d: NahmData, order: int) -> QSeries:
    """sum over n >= 0 of q^(n^t A n/2 + b^t n + c) / prod (q)_{n_i}, up to q^(c + order)."""
    pts = _lattice_points(d, order)
    k = 1
    for n in pts:
        k = math.lcm(k, (d.exponent(n) - d.c).denominator)
    length = k * order + 1
    # 1/(q)_m with q = x^k as integer lists, built incrementally
    inv = [[0] * length]
    inv[0][0] = 1
    maxn = max((max(n) for n in pts), default=0)
    for m in range(1, maxn + 1):
        prev = inv[-1][:]
        e = k * m
        for i in range(e, length):
            prev[i] += prev[i - e]  # multiply by 1/(1 - x^e)
        inv.append(prev)
    total = [0] * length
    for n in pts:
        off = int((d.exponent(n) - d.c) * k)
        prod = inv[n[0]]
        for m in n[1:]:
            prod = _mul_trunc(prod, inv[m], length - off)
        for i in range(length - off):
            total[off + i] += prod[i]
    return QSeries(d.c, tuple(total), order, k)


def _mul_trunc(a, b, length):
    out = [0] * length
    for i in range(min(length, len(a))):
        if a[i]:
            ai = a[i]
            for j in range(min(length - i, len(b))):
                if b[j]:
                    out[i + j] += ai * b[j]
    return out


def nahm_solve(A, ctx=None, start=None):
    """The solution of 1 - z_i = prod_j z_j^A_ij with every z_i in (0, 1).

    With x = log z this is the critical point of the strictly convex
    V(x) = x^t A x / 2 + sum Li2(e^x_i) on x < 0; damped Newton with
    step halving to stay in the domain and decrease V.
    """
    ctx = PrecisionContext(15) if ctx is None else ctx
    A = np.array(np.atleast_2d(np.array(A, dtype=object)), dtype=object)
    N = A.shape[0]
    with ctx.workdps():
        Am = mpmath.matrix([[mpmath.mpf(Fraction(x).numerator) / Fraction(x).denominator for x in row] for row in A.tolist()])
        x = mpmath.matrix([mpmath.log(mpmath.mpf(s)) for s in (start or [0.5] * N)])

        def grad(x):
            g = Am * x
            for i in range(N):
                g[i] -= mpmath.log(-mpmath.expm1(x[i]))
            return g

        def V(x):
            q = (x.T * Am * x)[0] / 2
            return q + mpmath.fsum(mpmath.polylog(2, mpmath.exp(x[i])) for i in range(N))

        tol = mpmath.mpf(10) ** (-ctx.digits)
        for _ in range(200):
            g = grad(x)
            if mpmath.norm(g, mpmath.inf) < tol:
                break
            Hm = Am.copy()
            for i in range(N):
                e = mpmath.exp(x[i])
                Hm[i, i] += e / (1 - e)
            step = mpmath.lu_solve(Hm, g)
            t = mpmath.mpf(1)
            v0 = V(x)
            for _ in range(60):
                xn = x - t * step
                if all(xn[i] < 0 for i in range(N)) and V(xn) <= v0 + tol:
                    break
                t /= 2
            else:
                raise ArithmeticError("Nahm Newton iteration cannot make progress")
            x = xn
        else:
            raise ArithmeticError("Nahm Newton iteration did not converge")
        z = [mpmath.exp(x[i]) for i in range(N)]
    return z


def nahm_residual(A, z):
    """max_i |1 - z_i - prod_j z_j^A_ij|."""
    A = np.atleast_2d(np.array(A, dtype=object))

    def power(x, a):
        a = Fraction(a)
        return x**a.numerator if a.denominator == 1 else x ** (mpmath.mpf(a.numerator) / a.denominator)

    return max(abs(1 - z[i] - mpmath.fprod(power(z[j], A[i, j]) for j in range(len(z)))) for i in range(len(z)))


class NahmParityError(ValueError):
    """The Nahm equation holds but the sign (-1)^(A B^t)_ii is -1."""

    def __init__(self, rows):
        self.rows = rows
        super().__init__(
            "sign mismatch: Nahm shapes satisfy the equations with sign +1 but "
            f"(A B^t)_ii is odd on rows {list(rows)}"
        )


def nahm_to_halfsymplectic(A, z, ctx=None) -> HalfSymplecticPair:
    """The pair ((I A), w) with w = 1 - z.

    Written for w the Nahm equation reads w_i = prod (1 - w_j)^A_ij, which is
    the gluing form with H = (I A) and completion (0 I).  Its sign is +1, so
    an odd diagonal entry of A (where the form demands -1) is rejected.
    """
    A = int_matrix(np.atleast_2d(np.array(A, dtype=object)))
    N = A.shape[0]
    H = np.hstack([identity(N), A])
    K = np.hstack([zeros(N, N), identity(N)])
    pts = tuple(LoggedPoint(mpmath.log(1 - mpmath.mpf(x)), mpmath.log(mpmath.mpf(x))) for x in z)
    P = HalfSymplecticPair(H, pts, K)
    odd = [i for i in range(N) if int(A[i, i]) % 2]
    if odd:
        raise NahmParityError(odd)
    rep = verify_eq18(P, ctx=ctx)
    if not rep.ok:
        raise ValueError(f"shapes do not solve the Nahm equation (rows {rep.failing_rows})")
    return P


# ---------------------------------------------------------------------------
# imaginary quadratic fields


def is_fundamental_discriminant(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return _squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n) for n >= 1."""
    if n < 1:
        raise ValueError("n must be positive")
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        result *= 1 if D % 8 in (1, 7) else -1
    # Jacobi symbol (D/n), n odd
    a = D % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@dataclass(frozen=True)
class ZetaValue:
    value: float  # zeta_F(2)
    L: float  # L(2, chi_D)
    tail_bound: float  # bound on the truncation error of L
    terms: int


def zeta_quadratic(D: int, terms: int = 10**6) -> ZetaValue:
    """zeta_F(2) = zeta(2) L(2, chi_D) for F = Q(sqrt D), D < 0 fundamental.

    The Dirichlet series is summed directly; by Abel summation the tail
    past `terms` is at most 2 S / (terms + 1)^2 where S bounds the partial
    character sums (S <= |D|).
    """
    if D >= 0 or not is_fundamental_discriminant(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")
    m = abs(D)
    chi = np.array([kronecker(D, r) if r else 0 for r in range(m)], dtype=float)
    n = np.arange(1, terms + 1, dtype=float)
    vals = chi[np.arange(1, terms + 1) % m] / (n * n)
    L = math.fsum(vals.tolist())
    S = float(np.max(np.abs(np.cumsum(chi))))
    tail = 2 * S / (terms + 1) ** 2
    return ZetaValue(math.pi**2 / 6 * L, L, tail, terms)


def zeta_quadratic_hurwitz(D: int, ctx=None):
    """zeta_F(2) via Hurwitz zeta: L(2, chi) = |D|^-2 sum_a chi(a) zeta(2, a/|D|)."""
    if D >= 0 or not is_fundamental_discriminant(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")
    ctx = PrecisionContext() if ctx is None else ctx
    m = abs(D)
    with ctx.workdps():
        L = mpmath.fsum(kronecker(D, a) * mpmath.zeta(2, mpmath.mpf(a) / m) for a in range(1, m)) / m**2
        return mpmath.zeta(2) * L


def recognize_rational(x, max_denominator: int = 10, tol: float = 1e-6):
    """Best rational approximation with bounded denominator, if within tol."""
    f = Fraction(float(x)).limit_denominator(max_denominator)
    return f if abs(float(x) - f.numerator / f.denominator) < tol else None
