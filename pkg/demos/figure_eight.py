"""The figure-eight knot complement from two ideal tetrahedra.

Walks from the gluing data to the gluing matrices, the complete hyperbolic
structure, the cusp shape and the first few Dehn fillings.  Run with
``python3 demos/figure_eight.py``.
"""

from _common import fixture

from nzgeom import geometry, triangulation, zlinalg
from nzgeom.dilogarithm import PrecisionContext

ctx = PrecisionContext(20)
T, G = fixture("fig8")
print(f"{T.N} tetrahedra, {T.h} cusp, {len(T.edge_classes)} edge classes")

print("\nedge and cusp rows U = (R' R''):")
print(zlinalg.format_matrix(G.U))
rep = triangulation.verify_nz_symplectic(G)
print("symplectic properties:", rep.items())

s = geometry.solve_complete(G, ctx=ctx)
print("\nshapes:", [geometry.mpmath.nstr(z, 12) for z in s.z])
print("volume:", geometry.mpmath.nstr(geometry.volume(s, ctx), 15))
tau = geometry.cusp_coordinates(s, G, ctx).tau[0]
print("cusp shape:", geometry.mpmath.nstr(tau, 12))

# Volume drops under filling, and the drop is roughly pi^2/Q
rep = geometry.filling_asymptotics(G, [(n, 1) for n in (5, 6, 8, 12, 20, 40)], ctx=PrecisionContext(15))
print("\n slope     volume      Q      drop*Q/pi^2")
for r in rep.rows:
    drop = rep.volume_complete - r.volume
    print(f"{str(r.slope):>7}  {r.volume:.8f}  {r.Q:7.2f}  {drop * r.Q / geometry.math.pi ** 2:.5f}")
