"""Nahm sums, their Bloch elements and a zeta value.

The rank one sums with A = 2 are the Rogers-Ramanujan functions.  The
solution of the Nahm equation gives a half-symplectic pair when the diagonal
of A is even; for odd diagonals the sign in the gluing form is wrong.
"""

import math

from nzgeom import arithmetic as ar
from nzgeom import bloch

f = ar.nahm_sum(ar.NahmData([[2]], [0], 0), 20)
print("A = 2, b = 0:", f.integer_coefficients())

for A in ([[2]], [[4, 2], [2, 2]], [[1]], [[4, 1], [1, 1]]):
    z = ar.nahm_solve(A)
    try:
        P = ar.nahm_to_halfsymplectic(A, z)
    except ar.NahmParityError as exc:
        print(f"A = {A}: z = {[round(float(x), 10) for x in z]}, {exc}")
        continue
    E = bloch.extended_element(P)
    R = bloch.regulator(E)
    print(f"A = {A}: z = {[round(float(x), 10) for x in z]}, Im R = {float(R.imag):.2e}, Re R / pi^2 = {bloch.torsion_difference(R.real, 0, 60)}")

z = ar.zeta_quadratic(-3)
vol = 2.029883212819307
print(f"\nzeta_Q(sqrt -3)(2) = {z.value:.12f} (tail <= {z.tail_bound:.1e})")
print("Vol(4_1) pi^2 / (3^1.5 zeta) =", ar.recognize_rational(vol * math.pi**2 / (3**1.5 * z.value)))
