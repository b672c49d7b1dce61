"""Complex volumes through the extended Bloch group.

The regulator of the element built from a half-symplectic pair has the
volume as imaginary part.  Moves on the pair and the 2-3 move on the
triangulation change the real part by torsion only.
"""

import mpmath
from _common import fixture

from nzgeom import bloch, geometry, triangulation
from nzgeom.dilogarithm import PrecisionContext

ctx = PrecisionContext(30)

for name in ("fig8", "sister", "whitehead"):
    _, G = fixture(name)
    s = geometry.solve_complete(G, ctx=ctx)
    P = bloch.pair_from_gluing(G, s)
    E = bloch.extended_element(P, ctx=ctx)
    R = bloch.regulator(E, ctx=ctx)
    wedge = bloch.wedge_check(E, bloch.ledger_for_pair(P, E)).vanishes
    k = bloch.torsion_difference(R.real, 0, max_den=12)
    print(f"{name:10} R = {mpmath.nstr(R, 15):35} wedge {wedge}  Re R / pi^2 = {k}")

_, G = fixture("fig8")
s = geometry.solve_complete(G, ctx=ctx)
P = bloch.pair_from_gluing(G, s)
R = bloch.regulator(bloch.extended_element(P, ctx=ctx), ctx=ctx)
print("\nmoves on the figure-eight pair (difference in units of pi^2):")
for mv in (bloch.Stabilize(), bloch.RotateShape(0, 1), bloch.RotateShape(1, 2), bloch.Renumber((1, 0)), bloch.LeftUnimodular([[1, 1], [0, 1]])):
    R2 = bloch.regulator(bloch.extended_element(bloch.apply_move(P, mv), ctx=ctx), ctx=ctx)
    print(f"  {type(mv).__name__:15} {bloch.torsion_difference(R2, R)}")

T, _ = fixture("fig8")
res = bloch.pachner_23(T, 0, 0, shapes=s.z)
G3 = triangulation.derive_edge_matrices(res.triangulation)
s3 = geometry.solve_complete(G3, init=[mpmath.log(z) for z in res.seed_shapes], ctx=ctx)
R3 = bloch.regulator(bloch.extended_element(bloch.pair_from_gluing(G3, s3), ctx=ctx), ctx=ctx)
print(f"\n2-3 move: {res.triangulation.N} tetrahedra, volume {mpmath.nstr(geometry.volume(s3), 15)},")
print(f"  five-term residual {mpmath.nstr(bloch.pachner_five_term_residual(s.z, res), 3)}, regulator change {bloch.torsion_difference(R3, R)} pi^2")
