"""Deforming the Whitehead link complement away from the complete structure.

Near u = 0 the cusp holonomies v depend holomorphically on u with symmetric
derivative, and the volume change is measured by the potential f(u).
"""

from _common import fixture

from nzgeom import geometry
from nzgeom.dilogarithm import PrecisionContext

ctx = PrecisionContext(15)
_, G = fixture("whitehead")
base = geometry.solve_complete(G, ctx=ctx)

D = geometry.dv_du(G, base, ctx)
print("dv/du at the complete structure:")
for i in range(2):
    print("  ", [complex(round(D[i, j].real, 10), round(D[i, j].imag, 10)) for j in range(2)])

grid = [(t, 0.6 * t) for t in (0.05, 0.05j, 0.08 + 0.04j, -0.1j)]
S = geometry.potential_scan(G, grid, base=base, ctx=ctx)
print("\n u1                  Vol(u)        eps(u)        identity residual")
for u, vol, eps, res in zip(S.u, S.vol, S.eps, S.identity_residual):
    print(f"{u[0]!s:<18}  {vol:.10f}  {eps:+.3e}  {res:+.1e}")
