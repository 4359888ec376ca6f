"""Shared quadrature and finite-difference helpers.

All field integrals in the package go through these routines so that
conservation and channel identities hold at the level of the discrete
sums, not just in the h -> 0 limit.  Two rules are used deliberately:

* uniform trapezoid sums for the transport-energy functionals, whose
  weights are invariant under integer grid shifts (exact relabelings),
* composite Simpson with a Richardson error estimate for generic norms.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import simpson


def powm(x: np.ndarray | float, m: float) -> np.ndarray:
    """|x|**m mapping |x| < 1e-300 to zero (also for negative exponents,
    where integrable r-weight singularities get the zero-node convention)."""
    ax = np.abs(np.asarray(x, dtype=float))
    small = ax < 1e-300
    out = np.where(small, 1.0, ax) ** m
    return np.where(small, 0.0, out)


def trapezoid_uniform(y: np.ndarray, h: float) -> float:
    return float(np.trapezoid(y, dx=h))


def trapezoid_with_error(y: np.ndarray, h: float) -> tuple[float, float]:
    """Trapezoid value and a coarse-grid Richardson error estimate."""
    val = float(np.trapezoid(y, dx=h))
    if len(y) >= 5:
        coarse = float(np.trapezoid(y[::2], dx=2.0 * h))
        err = abs(val - coarse) / 3.0
    else:
        err = 0.0
    return val, err


def simpson_uniform(y: np.ndarray, h: float) -> float:
    return float(simpson(y, dx=h))


def simpson_with_error(y: np.ndarray, h: float) -> tuple[float, float]:
    """Composite Simpson value and Richardson error estimate |S_h - S_2h|/15."""
    val = float(simpson(y, dx=h))
    if len(y) >= 5:
        coarse = float(simpson(y[::2], dx=2.0 * h))
        err = abs(val - coarse) / 15.0
    else:
        err = 0.0
    return val, err


def interval_trapezoid(x: np.ndarray, y: np.ndarray, a: float = -np.inf, b: float = np.inf) -> float:
    """Trapezoid of samples (x, y) restricted to [a, b], partial cells linear.

    x must be increasing.  Limits outside the sampled range are clamped;
    the integrand is treated as unknown (zero contribution) there.
    """
    a = max(float(a), float(x[0]))
    b = min(float(b), float(x[-1]))
    if a >= b:
        return 0.0
    ya = float(np.interp(a, x, y))
    yb = float(np.interp(b, x, y))
    i0 = int(np.searchsorted(x, a, side="right"))
    i1 = int(np.searchsorted(x, b, side="left"))
    xs = np.concatenate(([a], x[i0:i1], [b]))
    ys = np.concatenate(([ya], y[i0:i1], [yb]))
    return float(np.trapezoid(ys, xs))


def powered_integral(
    r: np.ndarray,
    u: np.ndarray,
    p: float,
    weight_exp: float,
    root: float,
    a: float = -np.inf,
    b: float = np.inf,
) -> float:
    """(integral_a^b |u|^p r^weight_exp dr) ** root, overflow-safe.

    The peak of |u| is factored out before exponentiation so that large
    p (the S-norm uses p = (2m+1)m) never overflows while |u|^(p*root)
    stays representable.
    """
    mask = (r >= a) & (r <= b)
    peak = float(np.max(np.abs(u[mask]))) if np.any(mask) else 0.0
    if peak == 0.0 or not np.isfinite(peak):
        return 0.0 if peak == 0.0 else float("inf")
    scaled = powm(u / peak, p) * powm(r, weight_exp)
    val = interval_trapezoid(r, scaled, a, b)
    if val <= 0.0:
        return 0.0
    log_out = p * root * np.log(peak) + root * np.log(val)
    if log_out > 700.0:
        return float("inf")
    return float(np.exp(log_out))


def fd_derivative(y: np.ndarray, h: float) -> np.ndarray:
    """d/dx of uniform samples: 4th-order centered interior, 3rd-order one-sided ends."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 4:
        raise ValueError("need at least 4 samples for the boundary stencils")
    d = np.empty_like(y)
    if n >= 5:
        d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[0] = (-11.0 * y[0] + 18.0 * y[1] - 9.0 * y[2] + 2.0 * y[3]) / (6.0 * h)
    d[1] = (-2.0 * y[0] - 3.0 * y[1] + 6.0 * y[2] - y[3]) / (6.0 * h)
    d[-1] = (11.0 * y[-1] - 18.0 * y[-2] + 9.0 * y[-3] - 2.0 * y[-4]) / (6.0 * h)
    d[-2] = (2.0 * y[-1] + 3.0 * y[-2] - 6.0 * y[-3] + y[-4]) / (6.0 * h)
    return d
