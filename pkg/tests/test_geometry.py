import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, load, solved
from nzgeom import geometry as geo
from nzgeom.dilogarithm import PrecisionContext

CTX = PrecisionContext(30)
FAST = PrecisionContext(15)

# SnapPy values for the census manifolds behind the fixtures (frozen oracle).
SNAPPY_VOLUME = {"fig8": 2.029883212819307, "sister": 2.029883212819307, "whitehead": 3.663862376708876}
SNAPPY_CUSP_SHAPE = {"fig8": [3.4641016151j], "sister": [0.5 + 0.86602540378j], "whitehead": [2j, 2j]}
SNAPPY_FILLED = {(5, 1): 0.9813688289, (8, 1): 1.58316666062}
SNAPPY_CORE_8_1 = 0.27889091029


@pytest.mark.parametrize("name", FIXTURES)
def test_complete_structure(name):
    _, G = load(name)
    s = solved(name)
    assert abs(float(geo.volume(s)) - SNAPPY_VOLUME[name]) < 1e-9
    assert s.residual < 10.0 ** (4 - CTX.digits)
    for angle in geo.edge_angle_sums(G, s):
        assert abs(angle - 2 * mpmath.pi) < 1e-20
    assert all(mpmath.im(z) > 0 for z in s.z)


def test_fig8_shapes_are_regular():
    s = solved("fig8")
    for z in s.z:
        assert abs(z - mpmath.expjpi(mpmath.mpf(1) / 3)) < 1e-25


def test_precision_levels_agree():
    _, G = load("whitehead")
    lo = geo.volume(geo.solve_complete(G, ctx=FAST))
    hi = geo.volume(solved("whitehead"))
    assert abs(lo - hi) < 1e-12


def test_init_is_honoured():
    _, G = load("fig8")
    s = geo.solve_complete(G, init=[mpmath.log(0.4 + 0.9j)] * 2, ctx=CTX)
    assert abs(geo.volume(s) - SNAPPY_VOLUME["fig8"]) < 1e-12


@pytest.mark.parametrize("name", FIXTURES)
def test_cusp_shape_matches_snappy(name):
    _, G = load(name)
    c = geo.cusp_coordinates(solved(name, 15), G, FAST)
    for got, want in zip(c.tau, SNAPPY_CUSP_SHAPE[name]):
        assert abs(complex(got) - want) < 1e-8


def test_whitehead_dvdu_symmetric():
    _, G = load("whitehead")
    D = geo.dv_du(G, solved("whitehead"), CTX)
    assert abs(D[0, 1] - D[1, 0]) < 1e-20
    Dn = geo.dv_du_numeric(G, solved("whitehead", 15), FAST)
    assert abs(Dn[0, 1] - Dn[1, 0]) < 1e-6
    assert abs(complex(Dn[0, 1]) - complex(D[0, 1])) < 1e-6


@pytest.mark.parametrize("slope", sorted(SNAPPY_FILLED))
def test_filled_volumes_match_snappy(slope):
    _, G = load("fig8")
    s = geo.solve_filled(G, geo.DehnFilling((slope,)), solved("fig8", 15), ctx=FAST)
    assert abs(float(geo.volume(s)) - SNAPPY_FILLED[slope]) < 1e-9


def test_core_length_matches_snappy():
    _, G = load("fig8")
    kappa = geo.DehnFilling(((8, 1),))
    s = geo.solve_filled(G, kappa, solved("fig8", 15), ctx=FAST)
    L = geo.core_length(s, G, kappa, FAST)
    assert abs(float(L[0]) - SNAPPY_CORE_8_1) < 1e-9


def test_small_slope_reported():
    _, G = load("fig8")
    with pytest.raises(geo.SolverError):
        geo.solve_filled(G, geo.DehnFilling(((1, 0),)), solved("fig8", 15), ctx=FAST)


def test_dehn_filling_parsing():
    assert geo.DehnFilling.parse(["3,1", "inf"]).slopes == ((3, 1), None)
    assert not geo.DehnFilling.parse(["2.5,1"]).is_integral
    with pytest.raises(ValueError):
        geo.DehnFilling(((2, 4),))
    with pytest.raises(ValueError):
        geo.DehnFilling(((0, 0),))


@given(st.integers(-30, 30), st.integers(-30, 30), st.floats(-2, 2), st.floats(0.1, 5))
@settings(max_examples=100, deadline=None)
def test_quadratic_form_properties(p, q, x, y):
    tau = complex(x, y)
    if p == 0 and q == 0:
        assert geo.quadratic_form(tau, p, q) == 0
        return
    Q = geo.quadratic_form(tau, p, q)
    assert Q > 0
    assert math.isclose(Q, geo.quadratic_form(tau, -p, -q))
    assert math.isclose(4 * Q, geo.quadratic_form(tau, 2 * p, 2 * q))
    # SL2(Z) change of basis: tau -> tau + 1 with (p, q) -> (p, q - p)
    assert math.isclose(Q, geo.quadratic_form(tau + 1, p, q - p), rel_tol=1e-9)


def test_quadratic_form_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        geo.quadratic_form(1 - 1j, 1, 0)


def test_filled_volumes_increase_to_complete():
    _, G = load("fig8")
    rep = geo.filling_asymptotics(G, [(n, 1) for n in (6, 8, 12, 20)], FAST)
    vols = [r.volume for r in rep.rows]
    assert all(a < b for a, b in zip(vols, vols[1:]))
    assert vols[-1] < rep.volume_complete
    # leading term pi^2/Q dominates the volume drop
    r = rep.rows[-1]
    assert abs(r.residual_volume_Q) < 0.1 * math.pi**2 / r.Q


def test_potential_at_base_point():
    _, G = load("whitehead")
    S = geo.potential_scan(G, [(0j, 0j)], ctx=FAST)
    assert S.f[0] == 0 and S.eps[0] == 0 and S.v[0] == (0j, 0j)


def test_potential_volume_identity_small_grid():
    _, G = load("whitehead")
    grid = [(complex(x), complex(0.6 * y)) for x in (-0.08, 0.05) for y in (-0.07, 0.09)]
    S = geo.potential_scan(G, grid, ctx=FAST)
    assert max(abs(r) for r in S.identity_residual) < 1e-10
    assert max(S.quadrature_error) < 1e-10


def test_eps_is_fourth_order_on_fig8():
    _, G = load("fig8")
    for direction in (1, 1j, (1 + 1j) / abs(1 + 1j)):
        ratios = []
        for r in (0.08, 0.04):
            S = geo.potential_scan(G, [(r * direction,)], ctx=FAST)
            ratios.append(abs(S.eps[0]) / r**4)
        assert max(ratios) < 10 * max(min(ratios), 1e-3)


def test_complex_volume_imaginary_part():
    _, G = load("fig8")
    s = solved("fig8")
    cv = geo.complex_volume(s, G=G, ctx=CTX)
    assert abs(cv.imag - geo.volume(s)) < 1e-20


def test_filling_residuals_fourth_order_at_large_n():
    _, G = load("fig8")
    rep = geo.filling_asymptotics(G, [(n, 1) for n in (50, 80, 120, 200)], ctx=CTX)
    assert rep.exponents["residual_volume_Q"] > 3.8 and rep.exponents["residual_length"] > 3.8
    scaled = [r.residual_volume_Q * r.slope[0] ** 4 for r in rep.rows]
    assert abs(scaled[-1] - scaled[-2]) < 0.01 * abs(scaled[-1])


def test_wrong_cusp_sign_has_no_complete_structure():
    from dataclasses import replace

    _, G = load("fig8")
    signs = list(G.signs)
    signs[G.N] = -signs[G.N]
    with pytest.raises(geo.SolverError):
        geo.solve_complete(replace(G, signs=tuple(signs)), ctx=FAST)
