"""Dilogarithm and its relatives at configurable precision (mpmath backed).

All functions take an optional ``ctx`` (a PrecisionContext).  Results are
mpmath numbers computed at ``ctx.digits`` decimal digits plus a few guard
digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import mpmath

__all__ = [
    "PrecisionContext",
    "LoggedPoint",
    "li2",
    "bloch_wigner",
    "lobachevsky",
    "lifted_L",
    "rogers_L",
    "cyclic_qdilog",
    "reduce_mod_4pi2",
    "equal_mod_4pi2",
]

GUARD_DIGITS = 10


@dataclass(frozen=True)
class PrecisionContext:
    digits: int = 30
    tolerance: float | None = None  # series truncation; default 10^-(digits+5)

    def __post_init__(self):
        if self.digits < 5:
            raise ValueError("need at least 5 digits")

    @property
    def series_tol(self):
        return mpmath.mpf(10) ** -(self.digits + 5) if self.tolerance is None else mpmath.mpf(self.tolerance)

    @property
    def error_bound(self) -> float:
        """Error advertised on results."""
        return 10.0 ** (2 - self.digits)

    def workdps(self):
        return mpmath.workdps(self.digits + GUARD_DIGITS)


DEFAULT = PrecisionContext()


def _ctx(ctx):
    return DEFAULT if ctx is None else ctx


@dataclass(frozen=True)
class LoggedPoint:
    """A point (u, v) of the cover, i.e. e^u + e^v = 1."""

    u: complex
    v: complex

    @classmethod
    def from_z(cls, z, ctx=None):
        """Principal logarithms of z and 1 - z."""
        with _ctx(ctx).workdps():
            z = mpmath.mpc(z)
            return cls(mpmath.log(z), mpmath.log(1 - z))

    @property
    def z(self):
        return mpmath.exp(self.u)

    def residual(self, ctx=None):
        with _ctx(ctx).workdps():
            return abs(mpmath.exp(self.u) + mpmath.exp(self.v) - 1)

    def check(self, ctx=None, tol=None):
        c = _ctx(ctx)
        # inputs may only carry double precision
        tol = max(c.error_bound, 1e-12) if tol is None else tol
        r = self.residual(c)
        if not r <= tol * (1 + abs(mpmath.exp(self.u))):
            raise ValueError(f"(u, v) is not on the cover: |e^u + e^v - 1| = {mpmath.nstr(r, 5)}")
        return self


def _li2_series(z, tol):
    s, term, n = mpmath.mpc(0), z, 1
    while True:
        t = term / (n * n)
        s += t
        if abs(t) < tol:
            return s
        n += 1
        term *= z


def _li2_bernoulli(z, tol):
    # Li2(z) = sum_n B_n w^(n+1)/(n+1)!, w = -log(1-z), converges for |w| < 2 pi
    # (odd Bernoulli numbers past B_1 vanish)
    w = -mpmath.log(1 - z)
    w2 = w * w
    s = w - w2 / 4
    power, fact, n = w, mpmath.mpf(1), 0
    while True:
        n += 2
        power *= w2
        fact *= n * (n + 1)
        t = mpmath.bernoulli(n) * power / fact
        s += t
        if abs(t) < tol:
            return s


def _li2(z, tol):
    if z == 0:
        return mpmath.mpc(0)
    if z == 1:
        return mpmath.mpc(mpmath.pi**2 / 6)
    r = abs(z)
    if r <= 0.5:
        return _li2_series(z, tol)
    if r > 1:
        lg = mpmath.log(-z)
        return -mpmath.pi**2 / 6 - lg * lg / 2 - _li2(1 / z, tol)
    if z.real > 0.5:
        return mpmath.pi**2 / 6 - mpmath.log(z) * mpmath.log(1 - z) - _li2(1 - z, tol)
    return _li2_bernoulli(z, tol)


def li2(z, ctx=None):
    """Principal branch of Li2 on C minus [1, oo).

    On the cut the value from below (Im z -> 0-) is returned.
    """
    c = _ctx(ctx)
    with c.workdps():
        z = mpmath.mpc(z)
        if z.imag == 0 and z.real > 1:
            x = z.real
            lx = mpmath.log(x)
            val = mpmath.pi**2 / 3 - lx * lx / 2 - _li2(mpmath.mpc(1 / x), c.series_tol) - 1j * mpmath.pi * lx
        else:
            val = _li2(z, c.series_tol)
    return val


def bloch_wigner(z, ctx=None):
    """D(z) = Im Li2(z) + arg(1 - z) log|z|; zero on the real line."""
    c = _ctx(ctx)
    with c.workdps():
        z = mpmath.mpc(z)
        if z.imag == 0:
            return mpmath.mpf(0)
        val = li2(z, c).imag + mpmath.arg(1 - z) * mpmath.log(abs(z))
    return val


def lobachevsky(theta, ctx=None):
    """Lobachevsky function, computed as D(e^(2 i theta)) / 2."""
    c = _ctx(ctx)
    with c.workdps():
        theta = mpmath.mpf(theta)
        t = theta - mpmath.pi * mpmath.floor(theta / mpmath.pi)
        if t == 0:
            return mpmath.mpf(0)
        val = bloch_wigner(mpmath.expjpi(2 * t / mpmath.pi), c) / 2
    return val


def lifted_L(v, branch_shift=0, ctx=None):
    """L(v + 2 pi i n) for n = branch_shift, where L(v) = Li2(1 - e^v).

    L is continued from the strip |Im v| < pi using
    L(v + 2 pi i n) = L(v) - 2 pi i n log(1 - e^v); the value is meaningful
    modulo 4 pi^2.
    """
    c = _ctx(ctx)
    with c.workdps():
        v = mpmath.mpc(v) + 2j * mpmath.pi * branch_shift
        m = int(mpmath.floor((v.imag + mpmath.pi) / (2 * mpmath.pi)))
        v0 = v - 2j * mpmath.pi * m
        if v0.real == 0 and abs(v0.imag) < 1e-30:
            raise ValueError("L has a pole at v in 2 pi i Z")
        w = -mpmath.expm1(v0)  # 1 - e^v0
        if w == 0:
            raise ValueError("L has a pole at v in 2 pi i Z")
        # on the line Im v0 = -pi the point 1 - e^v0 lies on the cut [1, oo),
        # approached from below, which is the right boundary value
        val = li2(w, c) - 2j * mpmath.pi * m * mpmath.log(w)
    return val


def rogers_L(p: LoggedPoint, ctx=None):
    """L(v) + uv/2 - pi^2/6 at a point of the cover, modulo 4 pi^2."""
    c = _ctx(ctx)
    p.check(c)
    with c.workdps():
        u, v = mpmath.mpc(p.u), mpmath.mpc(p.v)
        val = lifted_L(v, 0, c) + u * v / 2 - mpmath.pi**2 / 6
    return val


def reduce_mod_4pi2(x, ctx=None):
    """Canonical representative: real part in [0, 4 pi^2)."""
    with _ctx(ctx).workdps():
        x = mpmath.mpc(x)
        p = 4 * mpmath.pi**2
        re = x.real - p * mpmath.floor(x.real / p)
        if re >= p:
            re -= p
        val = mpmath.mpc(re, x.imag)
    return val


def equal_mod_4pi2(a, b, tol=1e-20, ctx=None):
    with _ctx(ctx).workdps():
        d = reduce_mod_4pi2(mpmath.mpc(a) - mpmath.mpc(b), ctx)
        p = 4 * mpmath.pi**2
        return abs(d.imag) <= tol and min(d.real, p - d.real) <= tol


def cyclic_qdilog(x, n: int, zeta_index: int = 1, ctx=None):
    """prod_{k=1}^{n-1} (1 - zeta^k x)^k with zeta = exp(2 pi i zeta_index / n)."""
    if n < 1:
        raise ValueError("n must be positive")
    if gcd(zeta_index, n) != 1:
        raise ValueError(f"zeta_index {zeta_index} is not coprime to {n}")
    c = _ctx(ctx)
    with c.workdps():
        x = mpmath.mpc(x)
        zeta = mpmath.expjpi(mpmath.mpf(2 * zeta_index) / n)
        out = mpmath.mpc(1)
        for k in range(1, n):
            out *= (1 - zeta**k * x) ** k
    return out
