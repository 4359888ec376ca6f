"""Stationary-profile construction: fixed point, inward continuation,
level rescaling, integrability probe, export."""

import json

import numpy as np
import pytest

from wavelab import ModelParams
from wavelab.stationary import (
    TailResult,
    _apply_tail_operator,
    build_profile,
    compare_profiles,
    continue_inward,
    export_profile,
    fixed_point_tail,
    not_in_l3m_check,
    z_ell,
)

FOC = ModelParams(m=3.0, iota=1)
DEF = ModelParams(m=3.0, iota=-1)


def test_source_off_fixed_point_is_constant():
    # with the coupling removed the operator returns the constant level
    x = np.linspace(np.log(2.0), np.log(200.0), 400)
    r = np.exp(x)
    g = 1.0 + 0.1 * np.sin(r)
    out, gp = _apply_tail_operator(g, r, x, 3.0, 0, 1.0, 200.0)
    assert np.allclose(out, 1.0, atol=1e-15)
    assert np.allclose(gp, 0.0, atol=1e-15)


def test_fixed_point_tail_contraction_and_exponent():
    tail = fixed_point_tail(FOC)
    assert tail.final_distance <= 1e-12
    assert tail.residual_distance <= 1e-12
    assert all(f < 0.5 for f in tail.contraction_factors)
    # geometric decay of successive distances
    assert max(tail.contraction_factors) < 0.2

    prof, diag = continue_inward(tail, FOC)
    assert prof.tail_exponent == pytest.approx(-(2 * 3.0 - 2.0), rel=0.05)
    assert diag["tail_exponent_fit_derivative"] == pytest.approx(-4.0, rel=0.05)
    # the tail closes on the target level within the closure tolerance
    closure = tail.R_max ** -(2 * 3.0 - 2.0)
    assert abs(tail.g[-1] - 1.0) <= 10.0 * closure + 1e-12


def test_two_window_overlap():
    # different closure radii agree on the shared window
    from scipy.interpolate import PchipInterpolator

    t1 = fixed_point_tail(FOC, R_max=1.0e3 * 2.3)
    t2 = fixed_point_tail(FOC, R_max=2.0e3 * 2.3)
    sel = t1.r <= t1.R_max
    g2 = PchipInterpolator(np.log(t2.r), t2.g)(np.log(t1.r[sel]))
    assert np.max(np.abs(g2 - t1.g[sel])) <= 1e-10


def test_focusing_inward_identities():
    tail = fixed_point_tail(FOC)
    prof, diag = continue_inward(tail, FOC)
    assert prof.R_detect == 0.0
    assert diag["ode_residual_rel"] <= 1e-10
    assert diag["lyapunov_residual_rel"] <= 1e-8
    assert diag["videntity_residual_rel"] <= 1e-8
    assert np.all(np.isfinite(prof.g))
    assert np.max(np.abs(prof.g)) < 10.0  # g stays bounded down to r_min


def test_defocusing_detects_positive_radius():
    prof, diag = build_profile(DEF)
    assert prof.R_detect > 0
    assert np.max(np.abs(prof.g)) >= 1e8
    assert diag["ode_residual_rel"] <= 1e-10


def test_z_ell_scaling():
    p1, _ = build_profile(DEF)
    m = 3.0
    for ell in (2.0, 0.5):
        scaled = z_ell(p1, ell)
        assert scaled.R_detect == pytest.approx(
            p1.R_detect * abs(ell) ** (m / (m - 1.0)), rel=1e-14
        )
        direct, _ = build_profile(DEF, ell=ell)
        assert direct.R_detect == pytest.approx(scaled.R_detect, rel=1e-6)
        lo = max(scaled.r_nodes[0], direct.r_nodes[0]) * 1.5
        hi = min(scaled.r_nodes[-1], direct.r_nodes[-1]) * 0.5
        assert compare_profiles(direct, scaled, lo, hi) <= 1e-6

    # identity and odd symmetry
    assert z_ell(p1, 1.0).R_detect == p1.R_detect
    neg = z_ell(p1, -1.0)
    assert np.allclose(neg.g, -p1.g)
    with pytest.raises(ValueError):
        z_ell(p1, 0.0)


def test_not_in_l3m():
    rep = not_in_l3m_check(FOC)
    assert rep.applicable
    assert np.all(np.diff(rep.partial_integrals) > 0)  # grows as r_min decreases
    assert rep.divergence_observed  # factor >= 10 over the last two decades
    # tail piece over r >= 1 is finite and on the 1/(3m-3) scale
    assert 0.3 < rep.tail_integral / rep.tail_reference < 3.0

    rep_d = not_in_l3m_check(DEF)
    assert not rep_d.applicable  # defocusing: excluded


def test_export_profile(tmp_path):
    prof, _ = build_profile(DEF)
    csv_path = tmp_path / "prof.csv"
    json_path = tmp_path / "prof.json"
    export_profile(prof, csv_path, json_path)
    header = csv_path.read_text().splitlines()[0]
    assert header == "r,g,gp,Z,Zp"
    meta = json.loads(json_path.read_text())
    assert meta["iota"] == -1
    assert meta["R_detect"] == pytest.approx(prof.R_detect)
