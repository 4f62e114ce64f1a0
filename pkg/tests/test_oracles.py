"""Closed-form reference values used by the release-gate checks."""

import cmath
import math

import numpy as np
import pytest

from transasym import oracles
from transasym.errors import PoleOfOracle, SheetUnreachable, ZeroC
from transasym.expansion import build_expansion
from transasym.systems import builtin

SQ3 = math.sqrt(3.0)


def test_lattice_constants():
    assert oracles.XI0 == pytest.approx(3.0 ** -0.5 * math.exp(-math.pi * SQ3 / 6.0))
    assert oracles.LATTICE_RATIO == pytest.approx(math.exp(math.pi * SQ3))


# -- first worked family -----------------------------------------------------


def test_level_profiles_pointwise():
    assert oracles.p1_h0(6.0) == pytest.approx(24.0, abs=1e-12)
    for m, fn in enumerate((oracles.p1_h0, oracles.p1_h1, oracles.p1_h2)):
        c = oracles.p1_h_taylor(m, 40)
        xi = 0.3
        assert np.polyval(c[::-1], xi) == pytest.approx(fn(xi), rel=1e-12)


def test_level_profiles_guard_their_pole():
    with pytest.raises(PoleOfOracle):
        oracles.p1_h0(12.0)
    with pytest.raises(ValueError):
        oracles.p1_h_taylor(3, 10)


def test_refined_singular_level():
    assert oracles.p1_xi_s_refined(10.0) == pytest.approx(13.09)
    with pytest.raises(ZeroDivisionError):
        oracles.p1_xi_s_refined(0.0)


def test_pole_positions_grow_like_n_to_four_fifths():
    z1 = oracles.p1_pole_z(12.0, 200)
    z2 = oracles.p1_pole_z(12.0, 400)
    assert abs(z2 / z1) == pytest.approx(2.0 ** 0.8, rel=2e-3)
    with pytest.raises(ZeroC):
        oracles.p1_pole_z(0.0, 3)
    with pytest.raises(ValueError):
        oracles.p1_pole_z(12.0, 0)


def test_xi_condition_value():
    assert oracles.p1_xi_condition(-1.0 / 24.0) == pytest.approx(339.0)
    with pytest.raises(ZeroDivisionError):
        oracles.p1_xi_condition(0.0)


def test_second_array_offset_formula():
    x_s = 3.0 + 4.0j
    got = oracles.p1_second_array_offset(x_s, 2)
    want = -cmath.log(x_s) + 5j * math.pi - math.log(60.0)
    assert got == pytest.approx(want, abs=1e-14)


def test_first_family_dispatch():
    assert oracles.p1_oracles("H0", 6.0) == pytest.approx(24.0)
    with pytest.raises(ValueError):
        oracles.p1_oracles("H9", 1.0)


# -- Abel branch geometry ----------------------------------------------------


def test_profile_inversion_round_trip():
    F0 = 0.3 + 0.2j
    xi = oracles.abel_xi_of_F0(F0)
    assert abs(oracles.abel_F0_of_xi(xi) - F0) < 1e-10


def test_profile_inversion_tangent_to_identity():
    # F_0(xi) = xi + O(xi^2) near the origin
    assert oracles.abel_F0_of_xi(1e-4) == pytest.approx(1e-4, abs=1e-6)


def test_principal_sheet_cut_rays_rejected():
    g = oracles.abel_geometry()
    with pytest.raises(SheetUnreachable):
        oracles.abel_F0_of_xi(g.xi0.real + 0.1)
    with pytest.raises(SheetUnreachable):
        oracles.abel_F0_of_xi(g.xi1.real - 1.0)
    with pytest.raises(SheetUnreachable):
        oracles.abel_F0_of_xi(0.1, winding=(1, 0))   # off-sheet needs a seed


def test_singular_level_lattice():
    assert oracles.abel_xi_set(0, 0) == pytest.approx(oracles.XI0)
    assert oracles.abel_xi_set(1, 0) == pytest.approx(-oracles.XI0)
    assert oracles.abel_xi_set(2, 1) == pytest.approx(oracles.abel_xi_set(0, 1))
    ratio = oracles.abel_xi_set(0, 3) / oracles.abel_xi_set(0, 2)
    assert ratio == pytest.approx(oracles.LATTICE_RATIO, rel=1e-12)


def test_local_branch_model_scaling():
    z0 = 1.0 + 1.0j
    d = 1e-6
    val = oracles.abel_local_branch_model(z0 + d, z0)
    assert val * math.sqrt(d) == pytest.approx(cmath.sqrt(-0.5), abs=1e-9)
    assert oracles.abel_local_branch_model(z0 + d, z0, sign=-1) == pytest.approx(-val)
    with pytest.raises(ZeroDivisionError):
        oracles.abel_local_branch_model(z0, z0)


def test_phase_field_stationary_points():
    for X, Y in ((0.0, 0.0), (-0.5, SQ3 / 6.0), (-0.5, -SQ3 / 6.0)):
        dX, dY = oracles.abel_phase_field(X, Y)
        assert abs(dX) < 1e-12 and abs(dY) < 1e-12


def test_geometry_endpoints():
    g = oracles.abel_geometry()
    assert g.xi0 == pytest.approx(oracles.XI0)
    assert g.xi1 == pytest.approx(-oracles.XI0 * oracles.LATTICE_RATIO, rel=1e-9)
    (lo_a, hi_a), (lo_b, hi_b) = g.first_sheet_cuts
    assert lo_a == -math.inf and hi_b == math.inf
    assert hi_a == pytest.approx(g.xi1.real) and lo_b == pytest.approx(g.xi0.real)


# -- second worked family ----------------------------------------------------


def test_sibling_profiles_match_their_taylor():
    xi = 0.3
    ca = oracles.p2_f0_taylor("a", 30)
    assert np.polyval(ca[::-1], xi) == pytest.approx(oracles.p2_f0_a(xi), rel=1e-12)
    assert np.max(np.abs(ca[::2])) == 0          # odd function of xi
    for b in (1, -1):
        cb = oracles.p2_f0_taylor("b", 30, b)
        assert np.polyval(cb[::-1], xi) == pytest.approx(
            oracles.p2_f0_b(xi, b), rel=1e-12)


def test_sibling_profiles_guard_their_poles():
    with pytest.raises(PoleOfOracle):
        oracles.p2_f0_a(3.0)
    with pytest.raises(PoleOfOracle):
        oracles.p2_f0_b(1j * math.sqrt(2.0))


# -- singular-scale correction ----------------------------------------------


def test_scale_correction_from_expansion():
    s, _ = builtin("p1")
    e = build_expansion(s, 2, 48)
    assert oracles.pole_scale_correction(e) == pytest.approx(10.9, abs=1e-6)
