"""Two-scale expansions: level recursion, evaluation, and Gevrey envelope."""

import cmath
import math

import numpy as np
import pytest

from transasym import oracles
from transasym.errors import OutsideReliableDisk, ScalePastBranch
from transasym.expansion import (TwoScaleExpansion, build_expansion,
                                 eval_two_scale, formal_power_series,
                                 gevrey_fit, least_term_index)
from transasym.systems import builtin


# -- level recursion ---------------------------------------------------------


def test_leading_profile_normalization():
    for label in ("p1", "abel", "p2a", "p2b"):
        s, _ = builtin(label)
        e = build_expansion(s, 0, 16)
        f0 = e.series(0)
        assert all(abs(c.coeffs[0]) < 1e-14 for c in f0)
        assert abs(f0[0].coeffs[1] - 1.0) < 1e-13       # F_0'(0) = e_1
        for j in range(1, s.n):
            assert abs(f0[j].coeffs[1]) < 1e-13


def test_p1_levels_match_closed_forms(e_p1):
    for m in range(3):
        got = e_p1.observable_series(m).coeffs[:15]
        ref = oracles.p1_h_taylor(m, 14)
        scale = np.max(np.abs(ref))
        assert np.all(np.abs(got - ref) <= 1e-10 * np.maximum(np.abs(ref), scale))


def test_p1_delayed_constants(e_p1):
    assert e_p1.free_constants[0] == pytest.approx(0.125, abs=1e-12)
    assert e_p1.free_constants[1] == pytest.approx(-3.0 / 128.0, abs=1e-12)


def test_abel_delayed_constants(e_abel):
    assert e_abel.free_constants[0] == pytest.approx(-0.36, abs=1e-12)
    assert e_abel.free_constants[1] == pytest.approx(-0.33253333333333335, abs=1e-12)


def test_substitution_residual_vanishes(e_p1):
    res = e_p1.residual_coefficients()
    scale = max(np.max(np.abs(level)) for level in e_p1.fm)
    assert np.max(np.abs(res[:, : e_p1.M + 1, :])) < 1e-9 * scale


def test_expansion_serialization_round_trip(e_p1, tmp_path):
    path = tmp_path / "e.json"
    e_p1.save(str(path))
    clone = TwoScaleExpansion.load(str(path))
    assert clone.M == e_p1.M and clone.K == e_p1.K
    for m in range(clone.M + 1):
        assert np.allclose(clone.fm[m], e_p1.fm[m])


# -- formal series and evaluation -------------------------------------------


def test_formal_series_agrees_with_two_scale_at_zero_C(p1, e_p1):
    tilde = formal_power_series(p1, 12)
    x = 10.0
    value, bound = eval_two_scale(e_p1, 0.0, x)
    for j in range(p1.n):
        direct = tilde[j].evaluate(x)
        assert abs(value[j] - direct) <= bound + 1e-12


def test_two_scale_profile_value(p1):
    # pick C so that xi(x) = 6 exactly at x = 10; level 0 alone gives H0(6)
    e = build_expansion(p1, 2, 64)
    x = 10.0
    C = 6.0 / (math.exp(-x) * x ** -0.5)
    value, _ = eval_two_scale(e, C, x, m_used=0)
    h = p1.observable_value(value)
    assert abs(h - 24.0) < 1e-9


def test_two_scale_linearization(e_p1):
    # |xi| tiny: observable ~ xi itself (F_0 ~ xi e_1, observable weight 1)
    x = 30.0
    C = 1e-9 / (math.exp(-x) * x ** -0.5)
    value, _ = eval_two_scale(e_p1, C, x, m_used=0)
    xi = e_p1.xi(C, x)
    assert abs(complex(value[0]) - xi) < 1e-6 * abs(xi)


def test_eval_guards(e_p1):
    with pytest.raises((OutsideReliableDisk, ScalePastBranch)):
        # xi(x) far outside the profile disk
        x = 5.0
        C = 100.0 / (math.exp(-x) * x ** -0.5)
        eval_two_scale(e_p1, C, x)


def test_least_term_index_clips():
    assert least_term_index(1.0, 7.3) == 7
    assert least_term_index(2.0, 7.3) == 3
    assert least_term_index(1.0, 25.0, m_cap=8) == 8


# -- Gevrey diagnostics ------------------------------------------------------


def test_gevrey_sup_norm_closed_form(p1):
    # sup of |H0| on |xi| = 6 is attained at xi = +6 (closest to the pole)
    e = build_expansion(p1, 0, 64)
    fit = gevrey_fit(e, 6.0)
    assert fit.sup_norms[0] == pytest.approx(24.0, abs=1e-9)


def test_gevrey_envelope_is_upper_bound(e_p1):
    fit = gevrey_fit(e_p1, 6.0)
    for m, sm in enumerate(fit.sup_norms):
        assert sm <= fit.envelope(m) * (1 + 1e-12)


def test_gevrey_single_level_trivial(p1):
    e = build_expansion(p1, 0, 32)
    fit = gevrey_fit(e, 4.0)
    assert fit.B_g == 1.0 and fit.r_squared == 1.0
