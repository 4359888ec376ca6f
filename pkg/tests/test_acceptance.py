"""Acceptance gate: one test per primary criterion, at pinned tolerances.

Run with `pytest tests/test_acceptance.py -s` to see one [PASS]/[FAIL]
line per criterion.  Tolerances are fixed here, not calibrated later.
"""

import time
import warnings

import numpy as np
import pytest

from wavelab import (
    ModelParams,
    RadialGrid,
    RadialPair,
    em_energy_pair,
    grid_for_radius,
    to_characteristic,
)
from wavelab.core import _bump_step
from wavelab.datagen import bump_pair, random_pair, random_profile, trial_rngs
from wavelab.field import SpaceTimeField
from wavelab.linwave import (
    channel_report,
    duhamel_frames,
    linear_field,
    propagate,
    weak_type_bruteforce_ratio,
    weak_type_check,
)
from wavelab.nlw import (
    calibrate_delta0,
    canonical_bump_pair,
    evolve_diamond,
    ode_blowup_time,
    perturbation_check,
    picard_solve,
    scattering_extract,
)
from wavelab.norms import (
    endpoint_l2linf_norm,
    hdot1_l2_norm,
    lm_norm,
    mixed_ab_norm,
    s_norm,
    weighted_st_norm,
)
from wavelab.profiles import (
    ProfileParams,
    SyntheticSequence,
    bessel_check,
    decoupling_check,
    hilbert_defect_oracle,
    modulate,
)
from wavelab.quadrature import interval_trapezoid, powm
from wavelab.stationary import build_profile, compare_profiles, z_ell

warnings.filterwarnings("ignore")


def report(num, name, passed, detail):
    mark = "PASS" if passed else "FAIL"
    print(f"[{mark}] criterion {num:>2} ({name}): {detail}")
    assert passed, f"criterion {num} ({name}): {detail}"


def test_criterion_01_energy_conservation():
    # Gaussian data, m in {1.5, 2, 3}, grid-aligned t in [0, 10]:
    # relative drift of the transport energy <= 1e-12, < 1s per case.
    h = 1.0 / 32.0
    n_shift = int(round(10.0 / h))
    grid = grid_for_radius(h, 4.0)
    big = RadialGrid(h, grid.n + n_shift)
    r = big.r
    z = (r - 1.3) / 0.5
    u0 = np.exp(-(z**2))
    u1 = 0.6 * np.exp(-(((r - 1.1) / 0.4) ** 2))
    pair = RadialPair(big, u0, u1, -2.0 * z / 0.5 * u0)
    prof = to_characteristic(pair, k_max=big.n - 1 + n_shift + 2)
    times = h * np.unique(np.concatenate([np.arange(1, 8), np.linspace(8, n_shift, 20).astype(int)]))
    worst = 0.0
    for m in (1.5, 2.0, 3.0):
        t0 = time.perf_counter()
        e0 = em_energy_pair(propagate(prof, 0.0, big), m).value
        drift = max(abs(em_energy_pair(propagate(prof, float(t), big), m).value - e0) / e0 for t in times)
        elapsed = time.perf_counter() - t0
        worst = max(worst, drift)
        assert elapsed < 1.0, f"m={m} took {elapsed:.2f}s"
    report(1, "energy conservation", worst <= 1e-12, f"max relative drift {worst:.3e} <= 1e-12")


def test_criterion_02_exterior_dichotomy():
    # 100 random profiles, R in {0, 0.5, 1, 2}: max over time directions of
    # the channel floor >= 0.5 x exterior data quantity, every trial, < 10 s.
    t0 = time.perf_counter()
    h = 1.0 / 64.0
    worst = np.inf
    for rng in trial_rngs(2024, 100):
        prof, _ = random_profile(h, 256, rng)
        prof = prof.padded(int(round(8.0 / h)))
        for R in (0.0, 0.5, 1.0, 2.0):
            rep = channel_report(prof, 2.5, R, [0.0, 1.0])
            worst = min(worst, max(rep.left, rep.right) - 0.5 * rep.lhs * (1.0 - 1e-12))
    elapsed = time.perf_counter() - t0
    ok = worst >= 0.0 and elapsed < 10.0
    report(2, "exterior dichotomy", ok, f"min margin {worst:.3e} >= 0, runtime {elapsed:.1f}s < 10s")


def _subkey_ab(m):
    if m > 2:
        return (
            2 * m * (m - 1) * (m + 2) / (m * m + 3 * m - 2),
            2 * m * (m - 1) * (m + 2) / (m - 2),
        )
    if m < 2:
        return (
            m * (m + 2) * (3 - m) / (m * m - m + 2),
            m * (m + 2) * (3 - m) / (2 * (2 - m)),
        )
    return None


def _linear_ratios(pair, m, T):
    grid = pair.grid
    n_steps = int(round(T / grid.h))
    prof = to_characteristic(pair, k_max=grid.n + n_steps + 2)
    field = linear_field(prof, grid, -n_steps * grid.h, 2 * n_steps + 1)
    lm = lm_norm(pair, m).value
    out = {
        "s": s_norm(field, m).value / lm,
        "endpoint": endpoint_l2linf_norm(field).value / hdot1_l2_norm(pair).value,
    }
    for alpha in (1.5, 2.0, 4.0):
        out[f"wst{alpha:g}"] = weighted_st_norm(field, alpha, m).value / lm
    ab = _subkey_ab(m)
    if ab:
        out["ab"] = mixed_ab_norm(field, ab[0], ab[1], m).value / lm
    return out


def _source_ratio(meta, grid, m, n_frames):
    from wavelab.datagen import _bump

    tt = grid.h * np.arange(n_frames)
    T = tt[-1]
    f = meta["amp"] * _bump((tt[:, None] - 0.5 * T) / (0.35 * T)) * _bump(
        (grid.r[None, :] - meta["c"] * grid.extent) / (meta["w"] * grid.extent)
    )
    u = duhamel_frames(f, grid)
    field = SpaceTimeField.from_u(grid, 0.0, u)
    src = float(
        np.trapezoid(
            [interval_trapezoid(grid.r, powm(grid.r * f[i], m)) ** (1 / m) for i in range(n_frames)],
            dx=grid.h,
        )
    )
    return s_norm(field, m).value / src


def test_criterion_03_strichartz_ratios():
    # >= 200 random data per m in {1.5, 2, 3}: every dispersive ratio is
    # finite and exactly scale-invariant to 1e-8; runtime < 2 min.
    t0 = time.perf_counter()
    h = 1.0 / 48.0
    grid = grid_for_radius(h, 3.0)
    T = 1.5
    lam = 1.75
    worst_ratio = 0.0
    worst_inv = 0.0
    for m in (1.5, 2.0, 3.0):
        for k, rng in enumerate(trial_rngs(99, 200)):
            pair, _ = random_pair(grid, rng)
            r0 = _linear_ratios(pair, m, T)
            g2 = RadialGrid(grid.h / lam, grid.n)
            a = lam ** (1.0 / m)
            pair2 = RadialPair(g2, a * pair.u0, a * lam * pair.u1, a * lam * pair.du0_samples())
            r1 = _linear_ratios(pair2, m, T / lam)
            worst_ratio = max(worst_ratio, max(r0.values()))
            worst_inv = max(worst_inv, max(abs(r1[k2] - v) / v for k2, v in r0.items() if v > 0))
            if k < 25:  # inhomogeneous bound on random sources
                meta = {
                    "amp": float(rng.uniform(0.5, 2.0)),
                    "c": float(rng.uniform(0.3, 0.5)),
                    "w": float(rng.uniform(0.1, 0.2)),
                }
                n_frames = int(round(T / h)) + 1
                q0 = _source_ratio(meta, grid, m, n_frames)
                meta2 = dict(meta, amp=meta["amp"] * lam ** (1.0 / m + 2.0))
                q1 = _source_ratio(meta2, g2, m, n_frames)
                worst_ratio = max(worst_ratio, q0)
                worst_inv = max(worst_inv, abs(q1 - q0) / q0)
    elapsed = time.perf_counter() - t0
    ok = np.isfinite(worst_ratio) and worst_inv <= 1e-8 and elapsed < 120.0
    report(
        3,
        "dispersive ratios",
        ok,
        f"max ratio {worst_ratio:.3g} finite, scale-invariance {worst_inv:.2e} <= 1e-8, runtime {elapsed:.0f}s < 120s",
    )


def test_criterion_04_weak_type():
    # sup_l l^a mu(E_l)^(1/a) / ||G||_1 finite, dilation-invariant to 1e-6,
    # brute-force agreement to 1e-3 on small instances.
    h = 1.0 / 64.0
    worst_ratio = 0.0
    worst_dil = 0.0
    worst_brute = 0.0
    for k, rng in enumerate(trial_rngs(31, 40)):
        prof, _ = random_profile(h, 80, rng)
        G = prof.fdot
        for alpha in (1.5, 2.0, 3.0):
            rep = weak_type_check(G, h, alpha)
            worst_ratio = max(worst_ratio, rep.ratio)
            worst_dil = max(worst_dil, rep.dilation_rel_diff)
        if k < 3:
            sub = G[::4]
            rep = weak_type_check(sub, h, 2.0, r_cells=120, t_pad=120)
            brute = weak_type_bruteforce_ratio(sub, h, 2.0, r_cells=120, t_pad=120, n_levels=10**6)
            worst_brute = max(worst_brute, abs(rep.ratio - brute) / brute)
    ok = np.isfinite(worst_ratio) and worst_dil <= 1e-6 and worst_brute <= 1e-3
    report(
        4,
        "weak-type bound",
        ok,
        f"max ratio {worst_ratio:.3g}, dilation {worst_dil:.2e} <= 1e-6, brute {worst_brute:.2e} <= 1e-3",
    )


def test_criterion_05_small_data_theory():
    # at delta = delta0/2: contraction factor <= 1/2 and ||u||_S <= 2 delta;
    # Picard and diamond differ by O(h^2): ratio in [3.2, 4.8].
    params = ModelParams(m=3.0, iota=1)
    grid = grid_for_radius(1.0 / 64.0, 6.0)
    T = 1.0
    delta0 = calibrate_delta0(params, grid, T)
    probe, _ = picard_solve(canonical_bump_pair(grid, 1e-6), params, T, max_iter=2)
    amp = 0.5 * delta0 / (s_norm(probe, 3.0).value / 1e-6)
    field_p, trace = picard_solve(canonical_bump_pair(grid, amp), params, T)
    factor = max(trace.factors) if trace.factors else 0.0

    field_d, _ = evolve_diamond(canonical_bump_pair(grid, amp), params, T)
    d1 = s_norm(field_d - field_p, 3.0).value
    g2 = RadialGrid(grid.h / 2, 2 * (grid.n - 1) + 1)
    field_p2, _ = picard_solve(canonical_bump_pair(g2, amp), params, T)
    field_d2, _ = evolve_diamond(canonical_bump_pair(g2, amp), params, T)
    ratio = d1 / s_norm(field_d2 - field_p2, 3.0).value
    ok = factor <= 0.5 and trace.final_s_norm <= 2.0 * trace.delta and 3.2 <= ratio <= 4.8
    report(
        5,
        "small-data theory",
        ok,
        f"factor {factor:.3g} <= 0.5, S {trace.final_s_norm:.3g} <= 2d {2*trace.delta:.3g}, order ratio {ratio:.2f} in [3.2,4.8]",
    )


def test_criterion_06_blowup():
    # focusing cone-constant data: breakdown time within 2% of the ODE
    # oracle, exit exponent -1/m within 5%, running data norm grows >= 10x.
    m, c = 3.0, 1.3
    grid = grid_for_radius(1.0 / 512.0, 3.0)
    u0 = c * _bump_step((2.0 + 0.3 - grid.r) / 0.3)
    pair = RadialPair(grid, u0, np.zeros(grid.n))
    T_ode = ode_blowup_time(c, m)
    field, out = evolve_diamond(pair, ModelParams(m=m, iota=1), grid.h * int(1.6 / grid.h))
    rel_T = abs(out.T_plus_estimate - T_ode) / T_ode
    rel_p = abs(out.blowup_exponent_fit + 1.0 / m) * m
    growth = float(np.max(out.lm_history) / out.lm_history[0])
    ok = out.status == "blowup_detected" and rel_T <= 0.02 and rel_p <= 0.05 and growth >= 10.0
    report(
        6,
        "focusing blow-up",
        ok,
        f"time err {rel_T:.3%} <= 2%, exponent err {rel_p:.3%} <= 5%, norm growth {growth:.2g} >= 10",
    )


def test_criterion_07_stationary_profiles():
    foc = ModelParams(m=3.0, iota=1)
    profile, diag = build_profile(foc)
    expo_rel = abs(profile.tail_exponent + 4.0) / 4.0
    oks = [
        profile.R_detect == 0.0,
        expo_rel <= 0.05,
        diag["ode_residual_rel"] <= 1e-10,
        diag["lyapunov_residual_rel"] <= 1e-8,
        diag["videntity_residual_rel"] <= 1e-8,
    ]
    defo = ModelParams(m=3.0, iota=-1)
    p1, diag_d = build_profile(defo)
    z_max = float(np.max(np.abs(p1.Z)))
    oks += [p1.R_detect > 0.0, z_max >= 1e8]
    scaled = z_ell(p1, 2.0)
    direct, _ = build_profile(defo, ell=2.0)
    r_rel = abs(direct.R_detect - scaled.R_detect) / scaled.R_detect
    lo = max(scaled.r_nodes[0], direct.r_nodes[0]) * 1.5
    hi = min(scaled.r_nodes[-1], direct.r_nodes[-1]) * 0.5
    curve = compare_profiles(direct, scaled, lo, hi)
    oks += [r_rel <= 1e-6, curve <= 1e-6]
    report(
        7,
        "stationary profiles",
        all(oks),
        f"tail expo err {expo_rel:.3%} <= 5%, residuals ode {diag['ode_residual_rel']:.1e}/lyap "
        f"{diag['lyapunov_residual_rel']:.1e}/ident {diag['videntity_residual_rel']:.1e}, "
        f"R1 {p1.R_detect:.4f} > 0 with |Z| {z_max:.2g} >= 1e8, scaling rel {r_rel:.1e} <= 1e-6",
    )


def _bessel_sequence(rng, m, h=1.0 / 64.0, n_count=4):
    from wavelab.datagen import bump_profile

    k = int(round(4.0 / h))
    p1 = bump_profile(h, k, amp=float(rng.uniform(0.5, 1.5)), center=0.0, width=1.0)
    p2 = bump_profile(h, k, amp=float(rng.uniform(0.5, 1.5)), center=0.5, width=0.8)
    lam = np.array([[1.0] * n_count, [4.0 ** (-(n + 1)) for n in range(n_count)]])
    rem = [
        modulate(bump_profile(h, k, amp=0.2 / (n + 1), center=0.0, width=1.0), 1.0, 12.0 + 6.0 * n, m)
        for n in range(n_count)
    ]
    return SyntheticSequence([p1, p2], ProfileParams(lam, np.zeros_like(lam)), rem)


def test_criterion_08_profile_decoupling_and_bessel():
    m = 3.0
    h = 1.0 / 64.0
    from wavelab.datagen import indicator_profile

    big = indicator_profile(h, int(round(4.0 / h)), 0.0, 2.0)
    lam = np.array([[1.0] * 5, [4.0 ** (-n) for n in range(1, 6)]])
    seq = SyntheticSequence([big, big], ProfileParams(lam, np.zeros_like(lam)))
    rep = decoupling_check(seq, range(5), m)
    slope_rel = abs(rep.slope - (1.0 - 1.0 / m)) / (1.0 - 1.0 / m)

    min_defect = np.inf
    max_pairing = 0.0
    max_oracle = 0.0
    for rng in trial_rngs(55, 5):
        bseq = _bessel_sequence(rng, m)
        brep = bessel_check(bseq, range(4), m)
        min_defect = min(min_defect, brep.min_defect_rel)
        max_pairing = max(max_pairing, float(np.max(brep.pairing_rel_errors)))
    for rng in trial_rngs(56, 5):
        bseq = _bessel_sequence(rng, 2.0)
        brep = bessel_check(bseq, range(4), 2.0)
        for n in range(4):
            oracle = hilbert_defect_oracle(bseq, n)
            max_oracle = max(max_oracle, abs(brep.defects[n] - oracle) / brep.energies[n])
    ok = slope_rel <= 0.10 and min_defect >= -1e-8 and max_pairing <= 1e-10 and max_oracle <= 1e-10
    report(
        8,
        "decoupling and Bessel",
        ok,
        f"cross slope err {slope_rel:.2e} <= 10%, min defect {min_defect:.2e} >= -1e-8, "
        f"pairing {max_pairing:.2e} <= 1e-10, Hilbert oracle {max_oracle:.2e} <= 1e-10",
    )


def test_criterion_09_scattering_extraction():
    params = ModelParams(m=3.0, iota=-1)
    grid = grid_for_radius(1.0 / 64.0, 6.5)
    r = grid.r
    z = (r - 1.2) / 0.5
    u0 = 0.4 * np.exp(-(z**2))
    data = RadialPair(grid, u0, np.zeros(grid.n), -2.0 * z / 0.5 * u0)
    lin_field, _ = evolve_diamond(data, params, 2.0, linear_only=True)
    drift = scattering_extract(lin_field, params).drift_rel
    nl_field, _ = evolve_diamond(data, params, 2.0)
    final_rel = scattering_extract(nl_field, params).final_rel
    ok = drift <= 1e-12 and final_rel < 1e-2
    report(
        9,
        "scattering extraction",
        ok,
        f"linear pullback drift {drift:.2e} <= 1e-12, defocusing tail {final_rel:.3%} < 1%",
    )


def test_criterion_10_perturbation_response():
    params = ModelParams(m=3.0, iota=1)
    grid = grid_for_radius(1.0 / 64.0, 4.0)
    base = bump_pair(grid, amp0=0.1, c0=0.3, w0=0.12)
    bump = bump_pair(grid, amp0=1.0, c0=0.35, w0=0.1)
    sizes = [1e-4, 1e-3, 1e-2]
    slopes = []
    for cone in (0.5, None):
        eps = []
        for sz in sizes:
            tilde = RadialPair(
                grid, base.u0 + sz * bump.u0, base.u1 + sz * bump.u1, base.du0 + sz * bump.du0
            )
            eps.append(perturbation_check(base, tilde, params, cone, 1.5).eps_out_s)
        slopes.append(float(np.polyfit(np.log(sizes), np.log(eps), 1)[0]))
    dev = max(abs(s - 1.0) for s in slopes)
    report(
        10,
        "perturbation response",
        dev <= 0.1,
        f"log-log slopes {slopes[0]:.3f} (cone) / {slopes[1]:.3f} (full), dev {dev:.3f} <= 0.1",
    )
