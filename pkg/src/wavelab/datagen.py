"""Randomized data families for the experiment scans.

Every family is a named, parameterized construction; draws log their
parameters so a run can be replayed from (family, params) without the
seed.  Pairs come with analytic derivatives where the closed form is
cheap, which keeps downstream quadratures at sampling accuracy.
"""

from __future__ import annotations

import numpy as np

from .core import CharProfile, RadialGrid, RadialPair


def gaussian_pair(grid: RadialGrid, amp0=1.0, c0=0.3, w0=0.15, amp1=0.0, c1=0.4, w1=0.2) -> RadialPair:
    """u0 and u1 Gaussian bumps; centers/widths are fractions of the extent."""
    r = grid.r
    R = grid.extent
    z0 = (r - c0 * R) / (w0 * R)
    u0 = amp0 * np.exp(-(z0**2))
    du0 = -2.0 * z0 / (w0 * R) * u0
    z1 = (r - c1 * R) / (w1 * R)
    u1 = amp1 * np.exp(-(z1**2))
    return RadialPair(grid, u0, u1, du0)


def _bump(z: np.ndarray) -> np.ndarray:
    """C^inf bump exp(1/(z^2-1)) on |z| < 1, zero outside."""
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(1.0 / (z[inside] ** 2 - 1.0))
    return out


def _bump_deriv(z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    zi = z[inside]
    out[inside] = np.exp(1.0 / (zi**2 - 1.0)) * (-2.0 * zi) / (zi**2 - 1.0) ** 2
    return out


def bump_pair(grid: RadialGrid, amp0=1.0, c0=0.4, w0=0.2, amp1=0.0, c1=0.5, w1=0.2) -> RadialPair:
    """Compactly supported smooth bumps."""
    r = grid.r
    R = grid.extent
    z0 = (r - c0 * R) / (w0 * R)
    u0 = amp0 * _bump(z0)
    du0 = amp0 * _bump_deriv(z0) / (w0 * R)
    z1 = (r - c1 * R) / (w1 * R)
    u1 = amp1 * _bump(z1)
    return RadialPair(grid, u0, u1, du0)


def random_pair(grid: RadialGrid, rng: np.random.Generator) -> tuple[RadialPair, dict]:
    family = rng.choice(["gaussian", "bump"])
    params = {
        "amp0": float(rng.uniform(0.2, 2.0)),
        "c0": float(rng.uniform(0.15, 0.5)),
        "w0": float(rng.uniform(0.06, 0.2)),
        "amp1": float(rng.uniform(-1.0, 1.0)),
        "c1": float(rng.uniform(0.15, 0.5)),
        "w1": float(rng.uniform(0.06, 0.2)),
    }
    maker = gaussian_pair if family == "gaussian" else bump_pair
    return maker(grid, **params), {"family": str(family), **params}


# ---------------------------------------------------------------------------
# profile (transport gauge) families


def gaussian_profile(h: float, k_max: int, amp=1.0, center=0.0, width=1.0) -> CharProfile:
    sigma = h * np.arange(-k_max, k_max + 1)
    return CharProfile(h, k_max, amp * np.exp(-((sigma - center) ** 2) / width**2))


def bump_profile(h: float, k_max: int, amp=1.0, center=0.0, width=1.0) -> CharProfile:
    sigma = h * np.arange(-k_max, k_max + 1)
    return CharProfile(h, k_max, amp * _bump((sigma - center) / width))


def indicator_profile(h: float, k_max: int, a: float, b: float, amp=1.0) -> CharProfile:
    """Half-open indicator amp * 1_[a, b) with its exact ramp primitive.

    Exact when a, b sit on the grid; the supplied primitive avoids the
    ringing a cumulative quadrature would produce at the jumps.
    """
    sigma = h * np.arange(-k_max, k_max + 1)
    vals = np.where((sigma >= a - 1e-12) & (sigma < b - 1e-12), amp, 0.0)
    F = amp * (np.clip(sigma, a, b) - np.clip(0.0, a, b))
    return CharProfile(h, k_max, vals, F)


def smoothed_indicator_profile(h: float, k_max: int, a: float, b: float, amp=1.0, edge=0.1) -> CharProfile:
    from .core import _bump_step

    sigma = h * np.arange(-k_max, k_max + 1)
    vals = amp * (_bump_step((sigma - a) / edge) - _bump_step((sigma - b) / edge))
    return CharProfile(h, k_max, vals)


def fourier_profile(
    h: float, k_max: int, amps, freqs, phases, envelope_width: float
) -> CharProfile:
    """Random trigonometric sum under a compact envelope."""
    sigma = h * np.arange(-k_max, k_max + 1)
    vals = np.zeros_like(sigma)
    for a, w, p in zip(amps, freqs, phases):
        vals += a * np.cos(w * sigma + p)
    vals *= _bump(sigma / envelope_width)
    return CharProfile(h, k_max, vals)


def random_profile(h: float, k_max: int, rng: np.random.Generator) -> tuple[CharProfile, dict]:
    window = h * k_max
    family = rng.choice(["gaussian", "bump", "smoothed_indicator", "fourier"])
    if family == "gaussian":
        params = {
            "amp": float(rng.uniform(0.2, 2.0)),
            "center": float(rng.uniform(-0.2, 0.2) * window),
            "width": float(rng.uniform(0.05, 0.2) * window),
        }
        prof = gaussian_profile(h, k_max, **params)
    elif family == "bump":
        params = {
            "amp": float(rng.uniform(0.2, 3.0)),
            "center": float(rng.uniform(-0.2, 0.2) * window),
            "width": float(rng.uniform(0.1, 0.3) * window),
        }
        prof = bump_profile(h, k_max, **params)
    elif family == "smoothed_indicator":
        a = float(rng.uniform(-0.3, 0.1) * window)
        b = a + float(rng.uniform(0.1, 0.3) * window)
        params = {"a": a, "b": b, "amp": float(rng.uniform(0.3, 2.0)), "edge": float(rng.uniform(0.02, 0.08) * window)}
        prof = smoothed_indicator_profile(h, k_max, **params)
    else:
        n_modes = int(rng.integers(2, 5))
        params = {
            "amps": [float(a) for a in rng.uniform(0.2, 1.0, n_modes)],
            "freqs": [float(f) for f in rng.uniform(0.5, 4.0, n_modes)],
            "phases": [float(p) for p in rng.uniform(0, 2 * np.pi, n_modes)],
            "envelope_width": float(rng.uniform(0.2, 0.45) * window),
        }
        prof = fourier_profile(h, k_max, **params)
    return prof, {"family": str(family), **params}


def trial_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent per-trial generators, stable under any execution order."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]
