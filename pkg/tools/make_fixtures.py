"""Regenerate the shipped ``.tri`` fixtures from SnapPy census triangulations.

Only needed when refreshing fixture data; the package itself never imports
snappy.  Run with an interpreter that has snappy installed::

    python tools/make_fixtures.py src/nzgeom/fixtures
"""
import sys
from pathlib import Path

import snappy

CENSUS = {
    "fig8": ("m004", "figure-eight knot complement"),
    "sister": ("m003", "figure-eight sister manifold"),
    "whitehead": ("m129", "Whitehead link complement"),
}


def tet_blocks(M):
    lines = [ln for ln in M._to_string().splitlines()]
    # header ends with the cusp table; the tetrahedron count follows it
    i = next(k for k, ln in enumerate(lines) if ln.strip().startswith(("torus", "Klein")))
    while lines[i].strip().startswith(("torus", "Klein")):
        i += 1
    rest = [ln for ln in lines[i:] if ln.strip()]
    n = int(rest[0])
    blocks = []
    for t in range(n):
        chunk = rest[1 + 8 * t: 1 + 8 * (t + 1)]
        neighbors = [int(x) for x in chunk[0].split()]
        perms = chunk[1].split()
        blocks.append((neighbors, perms))
    return blocks


def matrix_text(rows):
    out = [f"{len(rows)} {len(rows[0])}"]
    out += [" ".join(str(int(x)) for x in row) for row in rows]
    return "\n".join(out)


def write_fixture(key, outdir):
    name, description = CENSUS[key]
    M = snappy.Manifold(name)
    N, h = M.num_tetrahedra(), M.num_cusps()
    eqs = M.gluing_equations(form="rect")
    periph = eqs[N:]
    Mp = [list(periph[2 * i][0]) for i in range(h)]
    Mpp = [list(periph[2 * i][1]) for i in range(h)]
    Lp = [list(periph[2 * i + 1][0]) for i in range(h)]
    Lpp = [list(periph[2 * i + 1][1]) for i in range(h)]
    signs = [periph[2 * i][2] for i in range(h)] + [periph[2 * i + 1][2] for i in range(h)]
    text = [f"# {description}", f"# source: SnapPy census triangulation {name}",
            f"# volume {M.volume()}", f"{N} {h}"]
    for t, (neighbors, perms) in enumerate(tet_blocks(M)):
        for k in range(4):
            p = perms[k]
            f = int(p[k])
            text.append(f"face {k} -> tet {neighbors[k]} face {f} perm {p}")
    text.append("PERIPHERAL")
    for mat in (Mp, Mpp, Lp, Lpp):
        text.append(matrix_text(mat))
    text.append(" ".join(str(int(s)) for s in signs))
    Path(outdir, f"{key}.tri").write_text("\n".join(text) + "\n")


if __name__ == "__main__":
    outdir = sys.argv[1] if len(sys.argv) > 1 else "."
    for key in CENSUS:
        write_fixture(key, outdir)
