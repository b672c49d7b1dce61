"""The ``nz`` command line tool.

Every subcommand builds a Report (a list of named items, each with a
pass flag and values).  Text output uses 10 decimals; ``--json`` prints
the report itself and ``--report PATH`` saves it, so that ``nz check PATH``
can rerun the command and compare.  Exit status: 0 all items pass, 1 some
check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import mpmath
import numpy as np

from . import arithmetic, bloch, dilogarithm, geometry, triangulation, zlinalg
from .dilogarithm import LoggedPoint, PrecisionContext

__all__ = ["main", "run", "InputError", "load_pair", "format_pair"]


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting and reports


def fmt(x) -> str:
    if isinstance(x, (Fraction, int, np.integer)):
        return str(x)
    if isinstance(x, (complex, mpmath.mpc)):
        x = complex(x)
        return f"{x.real:.10f}{x.imag:+.10f}i"
    x = float(x)
    if x != 0 and abs(x) < 1e-9:
        return f"{x:.3e}"
    return f"{x:.10f}"


def _jsonable(x):
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    return fmt(x)


class Report:
    def __init__(self, argv, inputs, digits):
        self.argv = list(argv)
        self.inputs = inputs
        self.digits = digits
        self.items = []

    def add(self, name, ok=True, **values):
        self.items.append({"name": name, "pass": bool(ok), "values": _jsonable(values)})

    @property
    def ok(self):
        return all(it["pass"] for it in self.items)

    def to_json(self):
        return json.dumps(
            {"command": self.argv, "inputs": self.inputs, "precision": self.digits, "items": self.items},
            indent=2,
            sort_keys=True,
        )

    def to_text(self):
        lines = []
        for it in self.items:
            flag = "" if it["pass"] else "  [FAIL]"
            vals = it["values"]
            if not vals:
                lines.append(f"{it['name']}{flag}")
            elif len(vals) == 1 and "value" in vals:
                lines.append(f"{it['name']}: {_text(vals['value'])}{flag}")
            else:
                lines.append(f"{it['name']}{flag}")
                for k, v in vals.items():
                    lines.append(f"  {k}: {_text(v)}")
        return "\n".join(lines)


def _text(v):
    if isinstance(v, list):
        if v and isinstance(v[0], list):
            return "\n    " + "\n    ".join(" ".join(map(str, r)) for r in v)
        return " ".join(map(str, v))
    return str(v)


# ---------------------------------------------------------------------------
# input


def resolve_path(name) -> Path:
    p = Path(name)
    if p.exists():
        return p
    pkg = resources.files("nzgeom") / "fixtures" / p.name
    if pkg.is_file():
        return Path(str(pkg))
    if not p.suffix:
        pkg = resources.files("nzgeom") / "fixtures" / (p.name + ".tri")
        if pkg.is_file():
            return Path(str(pkg))
    raise InputError(f"no such file: {name}")


def _digest(path: Path):
    return {path.name: hashlib.sha256(path.read_bytes()).hexdigest()[:16]}


def _load_tri(name):
    path = resolve_path(name)
    try:
        return triangulation.load_triangulation(path), path
    except triangulation.TriangulationError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _gluing(T):
    try:
        return triangulation.derive_edge_matrices(T)
    except triangulation.TriangulationError as exc:
        raise InputError(str(exc)) from exc


def _int_list(text):
    return [int(x) for x in text.replace(",", " ").split()]


def _rat_matrix(text):
    rows = [r for r in text.split(";") if r.strip()]
    return [[Fraction(x) for x in r.replace(",", " ").split()] for r in rows]


def _slopes(items, h):
    if not items:
        return None
    try:
        fill = geometry.DehnFilling.parse(items)
    except ValueError as exc:
        raise InputError(f"bad slope: {exc}") from exc
    if len(fill.slopes) != h:
        raise InputError(f"need {h} slopes, got {len(fill.slopes)}")
    return fill


def _complex(text):
    try:
        return complex(text.replace("i", "j").replace(" ", ""))
    except ValueError as exc:
        raise InputError(f"not a complex number: {text}") from exc


def load_pair(text: str, ctx=None) -> bloch.HalfSymplecticPair:
    """Read a pair: an N x 2N matrix, then ``SHAPES`` and N lines.

    Each shape line is either ``u_re u_im v_re v_im`` (explicit branches),
    ``z z_re z_im`` (principal logs) or ``degenerate``.  An optional
    ``COMPLETION`` block holds the N x 2N completion.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    try:
        i = lines.index("SHAPES")
    except ValueError as exc:
        raise InputError("pair file needs a SHAPES section") from exc
    H = zlinalg.parse_matrix("\n".join(lines[:i]))
    N = H.shape[0]
    pts = []
    for ln in lines[i + 1 : i + 1 + N]:
        parts = ln.split()
        if parts == ["degenerate"]:
            pts.append(None)
        elif parts[0] == "z" and len(parts) == 3:
            pts.append(LoggedPoint.from_z(complex(float(parts[1]), float(parts[2])), ctx))
        elif len(parts) == 4:
            with (ctx or PrecisionContext()).workdps():
                a, b, c, d = (mpmath.mpf(x) for x in parts)
                pts.append(LoggedPoint(mpmath.mpc(a, b), mpmath.mpc(c, d)).check(ctx))
        else:
            raise InputError(f"bad shape line: {ln!r}")
    if len(pts) != N:
        raise InputError(f"expected {N} shapes, got {len(pts)}")
    K = None
    rest = lines[i + 1 + N :]
    if rest:
        if rest[0] != "COMPLETION":
            raise InputError(f"unexpected line {rest[0]!r}")
        K = zlinalg.parse_matrix("\n".join(rest[1:]))
    return bloch.HalfSymplecticPair(H, tuple(pts), K)


def format_pair(P: bloch.HalfSymplecticPair, digits=30) -> str:
    out = [zlinalg.format_matrix(P.H).rstrip("\n"), "SHAPES"]
    for p in P.points:
        if p is None:
            out.append("degenerate")
        else:
            u, v = mpmath.mpc(p.u), mpmath.mpc(p.v)
            out.append(" ".join(mpmath.nstr(x, digits) for x in (u.real, u.imag, v.real, v.imag)))
    out += ["COMPLETION", zlinalg.format_matrix(P.completion).rstrip("\n")]
    return "\n".join(out) + "\n"


def _pair_from_arg(name, ctx):
    path = resolve_path(name)
    if path.suffix == ".tri":
        T, _ = _load_tri(path)
        G = _gluing(T)
        s = geometry.solve_complete(G, ctx=ctx)
        return bloch.pair_from_gluing(G, s), path
    try:
        return load_pair(path.read_text(), ctx), path
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def cmd_validate(a, R, ctx):
    T, path = _load_tri(a.file)
    R.inputs.update(_digest(path))
    R.add("triangulation", N=T.N, h=T.h, edges=len(T.edge_classes), peripheral=T.peripheral is not None)


def cmd_matrices(a, R, ctx):
    T, path = _load_tri(a.file)
    R.inputs.update(_digest(path))
    G = _gluing(T)
    for name, M in (("R'", G.Rp), ("R''", G.Rpp), ("M'", G.Mp), ("M''", G.Mpp), ("L'", G.Lp), ("L''", G.Lpp)):
        R.add(name, matrix=[[int(x) for x in r] for r in np.asarray(M).tolist()])
    R.add("signs", value=list(G.signs))
    rep = triangulation.verify_nz_symplectic(G)
    R.add("symplectic identity", rep.ok, **rep.items())
    H, signs = triangulation.nz_half_symplectic(G)
    R.add("H", bool(zlinalg.is_half_symplectic(H)), matrix=[[int(x) for x in r] for r in H.tolist()])


def cmd_complex(a, R, ctx):
    T, path = _load_tri(a.file)
    R.inputs.update(_digest(path))
    C = triangulation.neumann_complex(T)
    ranks = C.ranks()
    R.add("chain complex", C.is_chain_complex())
    R.add("ranks", ranks.get("H_J") == 2 * T.h, **ranks)


def _solve(a, G, ctx):
    fill = _slopes(a.slope, G.h)
    base = geometry.solve_complete(G, ctx=ctx)
    if fill is None or all(s is None for s in fill.slopes):
        return base, fill
    return geometry.solve_filled(G, fill, base, ctx=ctx), fill


def cmd_solve(a, R, ctx):
    T, path = _load_tri(a.file)
    R.inputs.update(_digest(path))
    G = _gluing(T)
    s, _ = _solve(a, G, ctx)
    R.add("shapes", value=[complex(z) for z in s.z])
    R.add("residual", s.residual < 10.0 ** (4 - ctx.digits), value=s.residual, iterations=s.iterations)


def cmd_volume(a, R, ctx):
    T, path = _load_tri(a.file)
    R.inputs.update(_digest(path))
    G = _gluing(T)
    s, _ = _solve(a, G, ctx)
    R.add("volume", value=geometry.volume(s, ctx))


def _sweep(text):
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError as exc:
        raise InputError(f"sweep must look like 8..20, got {text!r}") from exc
    return [(n, 1) for n in range(lo, hi + 1)]


def cmd_fill(a, R, ctx):
    T, path = _load_tri(a.file)
    R.inputs.update(_digest(path))
    G = _gluing(T)
    if a.sweep:
        slopes = _sweep(a.sweep)
    elif a.slope:
        slopes = [geometry.DehnFilling.parse([s]).slopes[0] for s in a.slope]
    else:
        raise InputError("fill needs --slope or --sweep")
    rep = geometry.filling_asymptotics(G, slopes, ctx)
    R.add("complete volume", value=rep.volume_complete)
    R.add("cusp shape", value=rep.tau)
    vols = []
    for r in rep.rows:
        ok = not r.error and r.volume < rep.volume_complete
        vols.append(r.volume)
        R.add(
            f"slope {r.slope[0]},{r.slope[1]}",
            ok,
            volume=r.volume,
            Q=r.Q,
            L=r.L,
            res_volume_Q=r.residual_volume_Q,
            res_volume_L=r.residual_volume_L,
            res_length=r.residual_length,
            **({"error": r.error} if r.error else {}),
        )
    if a.sweep:
        mono = all(x < y for x, y in zip(vols, vols[1:]))
        R.add("monotone", mono)
        R.add("decay exponents", **rep.exponents)


def cmd_potential(a, R, ctx):
    T, path = _load_tri(a.file)
    R.inputs.update(_digest(path))
    G = _gluing(T)
    try:
        radius, n = a.grid.split(",")
        radius, n = float(radius), int(n)
    except ValueError as exc:
        raise InputError("--grid takes RADIUS,POINTS") from exc
    xs = np.linspace(-radius, radius, n)
    if G.h == 1:
        grid = [(complex(x, y),) for x in xs for y in xs]
    else:
        d = [1.0, 0.6] + [0.0] * (G.h - 2)
        grid = [tuple([complex(x)] + [complex(y * d[1])] + [0j] * (G.h - 2)) for x in xs for y in xs]
    S = geometry.potential_scan(G, grid, ctx=ctx)
    worst = max(abs(r) for r in S.identity_residual)
    R.add("points", value=len(grid))
    R.add("volume identity", worst < 1e-6, max_residual=worst, max_quadrature_error=max(S.quadrature_error))


def cmd_cvol(a, R, ctx):
    T, path = _load_tri(a.file)
    R.inputs.update(_digest(path))
    G = _gluing(T)
    s = geometry.solve_complete(G, ctx=ctx)
    cv = geometry.complex_volume(s, G=G, ctx=ctx)
    vol = geometry.volume(s, ctx)
    R.add("complex volume", abs(cv.imag - vol) < 1e-9, value=cv)
    r = bloch.torsion_difference(cv.real, 0, 8)
    R.add("real part / pi^2", value=(str(r) if r is not None else cv.real / mpmath.pi**2))


def cmd_bloch(a, R, ctx):
    P, path = _pair_from_arg(a.file, ctx)
    R.inputs.update(_digest(path))
    if a.action == "verify":
        rep = bloch.verify_eq18(P, ctx=ctx)
        R.add("equations", rep.ok, residuals=list(rep.residuals), e=list(rep.e), parity=list(rep.parity_ok))
        return
    if a.action == "move":
        P = bloch.apply_move(P, _parse_move(a))
        if a.output:
            Path(a.output).write_text(format_pair(P, ctx.digits))
        R.add("pair", bool(zlinalg.is_half_symplectic(P.H)), matrix=[[int(x) for x in r] for r in P.H.tolist()])
        rep = bloch.verify_eq18(P, ctx=ctx)
        R.add("equations", rep.ok)
    E = bloch.extended_element(P, xi_branch=a.xi_branch, ctx=ctx)
    if a.action in ("element", "move"):
        R.add("xi", value=E.xi)
        R.add("xi' branch", value=a.xi_branch)
        R.add("e", value=list(E.e))
        verdict = bloch.wedge_check(E, bloch.ledger_for_pair(P, E))
        R.add("wedge", verdict.vanishes, off_diagonal=str(verdict.off_diagonal), diagonal=str(verdict.diagonal))
    if a.action in ("regulator", "move"):
        R.add("regulator", value=bloch.regulator(E, ctx=ctx))


def _parse_move(a):
    if a.stabilize:
        return bloch.Stabilize()
    if a.unstabilize:
        return bloch.Unstabilize()
    if a.rotate:
        j, k = _int_list(a.rotate)
        return bloch.RotateShape(j, k)
    if a.renumber:
        return bloch.Renumber(tuple(_int_list(a.renumber)))
    if a.left:
        return bloch.LeftUnimodular(zlinalg.parse_matrix(resolve_path(a.left).read_text()))
    raise InputError("move needs one of --stabilize, --unstabilize, --rotate, --renumber, --left")


def cmd_nahm(a, R, ctx):
    A = _rat_matrix(a.A)
    b = [Fraction(x) for x in a.b.replace(",", " ").split()] if a.b else [0] * len(A)
    try:
        d = arithmetic.NahmData(A, b, Fraction(a.c))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    S = arithmetic.nahm_sum(d, a.order)
    terms = [[str(S.lead + Fraction(i, S.denom)), str(c)] for i, c in enumerate(S.coeffs)]
    R.add("coefficients", matrix=terms)


def cmd_nahm_solve(a, R, ctx):
    A = _rat_matrix(a.A)
    z = arithmetic.nahm_solve(A, ctx=ctx)
    res = arithmetic.nahm_residual(A, z)
    R.add("z", value=list(z))
    R.add("residual", res < 1e-12, value=res)
    if all(Fraction(x).denominator == 1 for row in A for x in row):
        try:
            P = arithmetic.nahm_to_halfsymplectic(A, z, ctx=ctx)
        except arithmetic.NahmParityError as exc:
            R.add("half-symplectic pair", False, odd_rows=exc.rows)
        else:
            R.add("half-symplectic pair", True, matrix=[[int(x) for x in r] for r in P.H.tolist()])


def cmd_zeta(a, R, ctx):
    try:
        zv = arithmetic.zeta_quadratic(a.disc, a.terms)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    R.add("zeta_F(2)", value=zv.value, L=zv.L, tail_bound=zv.tail_bound, terms=zv.terms)


def cmd_dilog(a, R, ctx):
    z = _complex(a.z)
    fn = a.fn
    if fn == "li2":
        val = dilogarithm.li2(z, ctx)
    elif fn == "D":
        val = dilogarithm.bloch_wigner(z, ctx)
    elif fn == "lob":
        val = dilogarithm.lobachevsky(z.real, ctx)
    elif fn == "L":
        val = dilogarithm.lifted_L(z, 0, ctx)
    else:
        val = dilogarithm.rogers_L(LoggedPoint.from_z(z, ctx), ctx)
    R.add(fn, value=val)


def cmd_matrix(a, R, ctx):
    path = resolve_path(a.file)
    R.inputs.update(_digest(path))
    try:
        M = zlinalg.parse_matrix(path.read_text())
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    rows = lambda X: [[int(x) for x in r] for r in np.asarray(X).tolist()]  # noqa: E731
    if a.action == "snf":
        U, D, V = zlinalg.smith_normal_form(M)
        R.add("D", matrix=rows(D))
        R.add("U", matrix=rows(U))
        R.add("V", matrix=rows(V))
    elif a.action == "rank":
        r, ker = zlinalg.rank_and_kernel(M)
        R.add("rank", value=r)
        R.add("kernel", matrix=[[int(x) for x in k] for k in ker])
    elif a.action == "halfsymp":
        v = zlinalg.is_half_symplectic(M)
        R.add("half-symplectic", bool(v), reasons=list(v.reasons))
    else:
        K = zlinalg.complete_to_symplectic(M)
        X = np.vstack([M, K])
        R.add("completion", zlinalg.is_symplectic(X), matrix=rows(K))


def cmd_check(a, R, ctx):
    path = resolve_path(a.file)
    try:
        old = json.loads(path.read_text())
    except (ValueError, OSError) as exc:
        raise InputError(f"{path}: not a report ({exc})") from exc
    argv = [x for x in old["command"] if x not in ("--json",)]
    argv = _strip_report(argv)
    new = _build(argv)
    same = new.items == old["items"]
    R.add("rerun", same, command=" ".join(old["command"]))
    R.add("original checks", all(it["pass"] for it in old["items"]))


def _strip_report(argv):
    out, skip = [], False
    for x in argv:
        if skip:
            skip = False
            continue
        if x == "--report":
            skip = True
            continue
        if x.startswith("--report="):
            continue
        out.append(x)
    return out


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=30, help="decimal digits (default 30)")
    common.add_argument("--order", type=int, default=50, help="q-series order (default 50)")
    common.add_argument("--json", action="store_true", help="print the JSON report")
    common.add_argument("--report", metavar="PATH", help="write the JSON report to PATH")

    p = argparse.ArgumentParser(prog="nz", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, file=True):
        sp = sub.add_parser(name, help=help_, parents=[common])
        if file:
            sp.add_argument("file")
        sp.set_defaults(func=fn)
        return sp

    add("validate", cmd_validate, "parse and validate a .tri file")
    add("matrices", cmd_matrices, "gluing matrices and the symplectic identity")
    add("complex", cmd_complex, "ranks of the chain complex of the triangulation")
    for name, fn, h in (("solve", cmd_solve, "solve gluing equations"), ("volume", cmd_volume, "hyperbolic volume")):
        sp = add(name, fn, h)
        sp.add_argument("--slope", action="append", help="p,q or inf, once per cusp")
    sp = add("fill", cmd_fill, "Dehn filling volumes and asymptotics")
    sp.add_argument("--slope", action="append")
    sp.add_argument("--sweep", help="n range a..b for slopes (n,1)")
    sp = add("potential", cmd_potential, "volume identity for the potential function")
    sp.add_argument("--grid", default="0.1,5", help="RADIUS,POINTS")
    add("cvol", cmd_cvol, "complex volume via the extended Bloch group")
    sp = add("bloch", cmd_bloch, "Bloch group operations on a pair or .tri file", file=False)
    sp.add_argument("action", choices=["verify", "element", "regulator", "move"])
    sp.add_argument("file")
    sp.add_argument("--xi-branch", type=int, default=0)
    sp.add_argument("--stabilize", action="store_true")
    sp.add_argument("--unstabilize", action="store_true")
    sp.add_argument("--rotate", help="j,k")
    sp.add_argument("--renumber", help="permutation, e.g. 1,0")
    sp.add_argument("--left", help="matrix file with a unimodular G")
    sp.add_argument("--output", help="write the moved pair here")
    sp = add("nahm", cmd_nahm, "Nahm sum coefficients", file=False)
    sp.add_argument("--A", required=True, help="rows separated by ';', e.g. '4,2;2,2'")
    sp.add_argument("--b", default="")
    sp.add_argument("--c", default="0")
    sp = add("nahm-solve", cmd_nahm_solve, "solve the Nahm equation", file=False)
    sp.add_argument("--A", required=True)
    sp = add("zeta", cmd_zeta, "zeta_F(2) of an imaginary quadratic field", file=False)
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--terms", type=int, default=10**6)
    sp = add("dilog", cmd_dilog, "dilogarithm evaluations", file=False)
    sp.add_argument("--fn", choices=["li2", "D", "lob", "L", "rogers"], default="D")
    sp.add_argument("z")
    sp = add("matrix", cmd_matrix, "integer matrix utilities", file=False)
    sp.add_argument("action", choices=["snf", "rank", "halfsymp", "complete"])
    sp.add_argument("file")
    add("check", cmd_check, "rerun a saved report and compare")
    return p


def _build(argv) -> Report:
    a = build_parser().parse_args(argv)
    ctx = PrecisionContext(a.prec)
    R = Report(argv, {}, a.prec)
    a.func(a, R, ctx)
    return R


def run(argv=None):
    """Run the tool; returns (exit code, report or None)."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        a = build_parser().parse_args(argv)
    except SystemExit as exc:
        return (2 if exc.code else 0), None
    try:
        R = _build(argv)
    except (InputError, triangulation.TriangulationError) as exc:
        print(f"nz: error: {exc}", file=sys.stderr)
        return 2, None
    except geometry.SolverError as exc:
        print(f"nz: solver failed: {exc}", file=sys.stderr)
        return 1, None
    except (ValueError, ZeroDivisionError) as exc:
        print(f"nz: error: {exc}", file=sys.stderr)
        return 2, None
    print(R.to_json() if a.json else R.to_text())
    if a.report:
        Path(a.report).write_text(R.to_json() + "\n")
    return (0 if R.ok else 1), R


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
