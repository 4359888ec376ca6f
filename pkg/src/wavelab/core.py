"""Radial grids, field pairs, and the characteristic transform.

A radial solution of the 3D wave equation is carried entirely by the
derivative of its d'Alembert profile: with U = r*u one has
U(t, r) = F(t+r) - F(t-r), and the pair (u, du/dt) at any time slice is
equivalent to samples of Fdot on a symmetric 1D window.  This module
owns that round trip, plus the truncation operator that freezes data
inside a ball and the cutoff-mollification used to regularize rough
pairs.

Grids are uniform with a node exactly at r = 0, and characteristic
windows share the same spacing, so that time shifts by integer
multiples of h are exact sample relabelings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from .quadrature import fd_derivative, powm

ALIGN_TOL = 1e-9


class GridMismatchError(ValueError):
    """Fields combined across incompatible grids."""


class WindowError(ValueError):
    """A characteristic window too small for the requested evaluation."""


@dataclass
class ModelParams:
    """Nonlinearity exponent m > 1 and sign iota (+1 focusing, -1 defocusing)."""

    m: float
    iota: int = 1

    def __post_init__(self):
        if not self.m > 1.0:
            raise ValueError(f"m must exceed 1, got {self.m}")
        if self.iota not in (+1, -1):
            raise ValueError(f"iota must be +1 or -1, got {self.iota}")

    @property
    def s_c(self) -> float:
        """Critical scaling regularity 3/2 - 1/m."""
        return 1.5 - 1.0 / self.m

    @property
    def energy_critical(self) -> bool:
        """m = 2 is allowed for linear cross-checks but excluded from the
        nonlinear dichotomy experiments, which must flag it."""
        return abs(self.m - 2.0) < 1e-12


@dataclass
class RadialGrid:
    """Uniform radial grid r_j = j*h, j = 0..n-1."""

    h: float
    n: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.n < 4:
            raise ValueError("need at least 4 nodes")

    @cached_property
    def r(self) -> np.ndarray:
        return self.h * np.arange(self.n)

    @property
    def extent(self) -> float:
        return self.h * (self.n - 1)

    def compatible(self, other: "RadialGrid") -> bool:
        return self.n == other.n and abs(self.h - other.h) <= ALIGN_TOL * self.h


def grid_for_radius(h: float, radius: float) -> RadialGrid:
    return RadialGrid(h=h, n=int(round(radius / h)) + 1)


@dataclass
class RadialPair:
    """Initial-data pair (u0, u1) on a radial grid.

    du0 optionally carries the analytic radial derivative of u0; when
    absent, finite differences are used wherever a derivative is needed.
    """

    grid: RadialGrid
    u0: np.ndarray
    u1: np.ndarray
    du0: np.ndarray | None = None

    def __post_init__(self):
        self.u0 = np.asarray(self.u0, dtype=float)
        self.u1 = np.asarray(self.u1, dtype=float)
        if self.du0 is not None:
            self.du0 = np.asarray(self.du0, dtype=float)
        for name in ("u0", "u1", "du0"):
            arr = getattr(self, name)
            if arr is None:
                continue
            if arr.shape != (self.grid.n,):
                raise GridMismatchError(f"{name} has shape {arr.shape}, grid has {self.grid.n} nodes")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite samples in {name}")

    def drv0(self) -> np.ndarray:
        """d/dr of (r*u0): u0 + r*du0 when the derivative is supplied, else FD."""
        if self.du0 is not None:
            return self.u0 + self.grid.r * self.du0
        return fd_derivative(self.grid.r * self.u0, self.grid.h)

    def du0_samples(self) -> np.ndarray:
        if self.du0 is not None:
            return self.du0
        return fd_derivative(self.u0, self.grid.h)

    @classmethod
    def zero(cls, grid: RadialGrid) -> "RadialPair":
        z = np.zeros(grid.n)
        return cls(grid, z, z.copy(), z.copy())


def decay_check(pair: RadialPair, m: float, decay_tol: float = 1e-3) -> tuple[bool, float]:
    """Soft boundary-decay check: |r^(1/m) u0| at the last node against the
    interior peak.  Returns (ok, ratio); callers report, never raise."""
    w = powm(pair.grid.r, 1.0 / m) ** 1.0 * np.abs(pair.u0)
    peak = float(np.max(w[:-1]))
    if peak == 0.0:
        return True, 0.0
    ratio = float(w[-1]) / peak
    return ratio <= decay_tol, ratio


@dataclass
class CharProfile:
    """Samples of Fdot on the symmetric window sigma_k = k*h, |k| <= k_max.

    Fdot is treated as zero outside the window; propagation to time T is
    only legitimate while the window still covers R_data + T, which the
    consumers check.  When the profile comes from a data pair, F_given
    carries the exact primitive (1/2) sigma u0(|sigma|) + (1/2) int r u1,
    which is exactly flat outside the data support; otherwise F falls
    back to the cumulative quadrature of fdot.
    """

    h: float
    k_max: int
    fdot: np.ndarray
    F_given: np.ndarray | None = None

    def __post_init__(self):
        self.fdot = np.asarray(self.fdot, dtype=float)
        if self.fdot.shape != (2 * self.k_max + 1,):
            raise ValueError("fdot must have 2*k_max + 1 samples")
        if not np.all(np.isfinite(self.fdot)):
            raise ValueError("non-finite profile samples")
        if self.F_given is not None:
            self.F_given = np.asarray(self.F_given, dtype=float)
            if self.F_given.shape != self.fdot.shape:
                raise ValueError("F_given must match the sample count")

    @property
    def window(self) -> float:
        return self.h * self.k_max

    @cached_property
    def sigma(self) -> np.ndarray:
        return self.h * np.arange(-self.k_max, self.k_max + 1)

    @cached_property
    def F(self) -> np.ndarray:
        """Primitive of fdot anchored at F(0) = 0 exactly."""
        if self.F_given is not None:
            return self.F_given
        c = cumulative_simpson(self.fdot, dx=self.h, initial=0.0)
        return c - c[self.k_max]

    @cached_property
    def dfdot(self) -> np.ndarray:
        return fd_derivative(self.fdot, self.h)

    @cached_property
    def _fdot_interp(self) -> PchipInterpolator:
        return PchipInterpolator(self.sigma, self.fdot, extrapolate=False)

    @cached_property
    def _F_interp(self) -> PchipInterpolator:
        return PchipInterpolator(self.sigma, self.F, extrapolate=False)

    def padded(self, k_max: int) -> "CharProfile":
        """Extend the window with zeros (no-op if already wide enough).

        The pad count is kept even so the cumulative-integral stencils
        stay aligned: F values on the shared window are then bit-identical
        between the original and the padded profile.  An exact primitive
        is continued by its edge values (fdot vanishes outside).
        """
        if k_max <= self.k_max:
            return self
        k_max += (k_max - self.k_max) % 2
        pad = k_max - self.k_max
        F_pad = None if self.F_given is None else np.pad(self.F_given, pad, mode="edge")
        return CharProfile(self.h, k_max, np.pad(self.fdot, pad), F_pad)

    def eval_fdot(self, s: np.ndarray) -> np.ndarray:
        out = self._fdot_interp(np.asarray(s, dtype=float))
        return np.nan_to_num(out, nan=0.0)

    def eval_F(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = self._F_interp(s)
        # constant continuation outside the window (fdot = 0 there)
        out = np.where(s > self.sigma[-1], self.F[-1], out)
        out = np.where(s < self.sigma[0], self.F[0], out)
        return out

    def shift_index(self, t: float) -> int | None:
        """Integer k with t = k*h, or None if t is not grid-aligned."""
        k = t / self.h
        k_round = round(k)
        if abs(k - k_round) <= ALIGN_TOL * max(1.0, abs(k)):
            return int(k_round)
        return None


def to_characteristic(pair: RadialPair, k_max: int | None = None) -> CharProfile:
    """Characteristic transform: Fdot(s) = (1/2) d(r u0)/dr (|s|) + (1/2) s u1(|s|).

    The window defaults to the grid extent; a larger k_max zero-pads
    beyond the data (the fields there must already have decayed).
    """
    n = pair.grid.n
    if k_max is None:
        k_max = n - 1
    if k_max < n - 1:
        raise WindowError("profile window smaller than the grid extent")
    k_max += (k_max - (n - 1)) % 2  # keep cumulative-integral stencils aligned
    drv = pair.drv0()
    k = np.arange(-k_max, k_max + 1)
    j = np.minimum(np.abs(k), n - 1)
    inside = np.abs(k) <= n - 1
    sigma = k * pair.grid.h
    fdot = np.where(inside, 0.5 * drv[j] + 0.5 * sigma * pair.u1[j], 0.0)
    # exact primitive from the data: only u1 needs a cumulative integral,
    # so F is exactly flat wherever the pair vanishes (finite speed of
    # propagation holds sample-by-sample downstream)
    D = cumulative_simpson(pair.grid.r * pair.u1, dx=pair.grid.h, initial=0.0)
    F = np.where(inside, 0.5 * sigma * pair.u0[j] + 0.5 * D[j], 0.0)
    F[~inside & (k > 0)] = F[k_max + n - 1]
    F[~inside & (k < 0)] = F[k_max - (n - 1)]
    return CharProfile(pair.grid.h, k_max, fdot, F)


def from_characteristic(prof: CharProfile, t: float, grid: RadialGrid | None = None) -> RadialPair:
    """Reconstruct the time-t slice: r*v = F(t+r) - F(t-r).

    Shifts by integer multiples of h are exact relabelings; off-grid
    times fall back to local monotone-cubic interpolation of F and Fdot.
    At r = 0 the limits v = 2 Fdot(t) and dv/dt = 2 Fddot(t) are used.
    """
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if grid is None:
        grid = RadialGrid(h=prof.h, n=prof.k_max + 1)
    if abs(grid.h - prof.h) > ALIGN_TOL * grid.h:
        raise GridMismatchError("grid spacing must match the profile spacing")
    if prof.window + ALIGN_TOL * prof.h < grid.extent + abs(t):
        raise WindowError(
            f"window {prof.window:g} does not cover extent {grid.extent:g} + |t| = {abs(t):g}"
        )
    n = grid.n
    kshift = prof.shift_index(t)
    if kshift is not None:
        c = prof.k_max + kshift
        Fp = prof.F[c : c + n]
        Fm = prof.F[c - n + 1 : c + 1][::-1]
        fp = prof.fdot[c : c + n]
        fm = prof.fdot[c - n + 1 : c + 1][::-1]
    else:
        sp = t + grid.r
        sm = t - grid.r
        Fp, Fm = prof.eval_F(sp), prof.eval_F(sm)
        fp, fm = prof.eval_fdot(sp), prof.eval_fdot(sm)
    r = grid.r
    u0 = np.empty(n)
    u1 = np.empty(n)
    du0 = np.empty(n)
    u0[1:] = (Fp[1:] - Fm[1:]) / r[1:]
    u1[1:] = (fp[1:] - fm[1:]) / r[1:]
    drv = fp + fm
    du0[1:] = (drv[1:] - u0[1:]) / r[1:]
    u0[0] = 2.0 * fp[0]
    # r = 0 limits via the odd extension of d_t(r v) through the origin
    w = fp - fm
    u1[0] = (8.0 * w[1] - w[2]) / (6.0 * grid.h)
    du0[0] = 0.0
    return RadialPair(grid, u0, u1, du0)


def truncate_TA(pair: RadialPair, A: float) -> RadialPair:
    """Freeze the pair inside radius A: (u0(A), 0) for r <= A, unchanged outside.

    A must sit on the grid (within alignment tolerance) so that the
    operation is exactly idempotent and the discrete exterior-norm
    identity holds node by node.
    """
    if A < 0:
        raise ValueError("A must be nonnegative")
    if A > pair.grid.extent + ALIGN_TOL:
        raise ValueError("A beyond the grid extent")
    jA = A / pair.grid.h
    j = int(round(jA))
    if abs(jA - j) > 1e-6:
        raise ValueError("A must lie on the grid")
    u0 = pair.u0.copy()
    u0[: j + 1] = pair.u0[j]
    u1 = pair.u1.copy()
    u1[: j + 1] = 0.0
    du0 = pair.du0_samples().copy()
    du0[: j + 1] = 0.0
    return RadialPair(pair.grid, u0, u1, du0)


# ---------------------------------------------------------------------------
# cutoff mollification


def _bump_step(t: np.ndarray) -> np.ndarray:
    """C^inf step: 0 for t <= 0, 1 for t >= 1, exp(-1/t)-quotient between."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def smooth_cutoff(s: np.ndarray) -> np.ndarray:
    """phi: 1 on |s| <= 1, 0 on |s| >= 2, smooth monotone transition."""
    return _bump_step(2.0 - np.abs(np.asarray(s, dtype=float)))


def _cutoff_derivative(s: np.ndarray, fd_h: float = 1e-5) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return (smooth_cutoff(s + fd_h) - smooth_cutoff(s - fd_h)) / (2.0 * fd_h)


def _mollifier_rule(eps: float, n_nodes: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes/weights for int f(r - rho) zeta_eps(rho) drho, rho in (-eps/2, 0).

    The weights are renormalized to unit mass so constants survive
    mollification exactly at the discrete level.
    """
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    half = eps / 4.0
    rho = -half + half * x  # maps (-1,1) -> (-eps/2, 0)
    s = x  # bump argument on (-1, 1)
    dens = np.exp(1.0 / (s**2 - 1.0))
    wq = w * dens
    wq /= wq.sum()
    return rho, wq


def regularize(pair: RadialPair, eps: float, n_quad: int = 32) -> RadialPair:
    """Cutoff-mollification f -> phi(eps r) (1 - phi(r/eps)) (f * zeta_eps).

    zeta_eps is supported in (-eps/2, 0); the result is supported in
    eps <= r <= 2/eps and is applied componentwise to (u0, u1).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    r = pair.grid.r
    rho, wq = _mollifier_rule(eps, n_quad)

    def conv(values: np.ndarray) -> np.ndarray:
        interp = PchipInterpolator(r, values, extrapolate=False)
        acc = np.zeros_like(values)
        for p, w in zip(rho, wq):
            acc += w * np.nan_to_num(interp(r - p), nan=0.0)
        return acc

    cut = smooth_cutoff(eps * r) * (1.0 - smooth_cutoff(r / eps))
    dcut = eps * _cutoff_derivative(eps * r) * (1.0 - smooth_cutoff(r / eps)) - smooth_cutoff(
        eps * r
    ) * _cutoff_derivative(r / eps) / eps
    u0_conv = conv(pair.u0)
    u0 = cut * u0_conv
    u1 = cut * conv(pair.u1)
    du0 = dcut * u0_conv + cut * conv(pair.du0_samples())
    return RadialPair(pair.grid, u0, u1, du0)


# ---------------------------------------------------------------------------
# pointwise radial bounds


@dataclass
class PointwiseBoundReport:
    max_violation_tail: float
    max_violation_origin: float
    tolerance: float

    @property
    def max_violation(self) -> float:
        return max(self.max_violation_tail, self.max_violation_origin)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def pointwise_radial_bound_check(pair: RadialPair, m: float) -> PointwiseBoundReport:
    """Check the sharp radial pointwise bounds at every node r > 0:

        |u0(r)|   <= (m-1)^((m-1)/m) r^(-1/m) (int_r^inf |s u0'(s)|^m ds)^(1/m)
        |r u0(r)| <= r^((m-1)/m) (int_0^r |d(s u0)/ds|^m ds)^(1/m)

    Both follow from the fundamental theorem of calculus and Holder, so
    violations can only come from quadrature; the outer half of the grid
    is excluded from the first bound because its tail integral is
    unresolved.  Violations are relative to the peak of |u0|.
    """
    r = pair.grid.r
    h = pair.grid.h
    du0 = pair.du0_samples()
    drv = pair.drv0()

    tail_integrand = powm(r * du0, m)
    # right-to-left cumulative trapezoid: integral from r_j to the grid end
    seg = 0.5 * h * (tail_integrand[:-1] + tail_integrand[1:])
    tail = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
    c1 = (m - 1.0) ** ((m - 1.0) / m)

    head_integrand = powm(drv, m)
    head = np.concatenate(([0.0], np.cumsum(0.5 * h * (head_integrand[:-1] + head_integrand[1:]))))
    rhs2 = powm(r[1:], (m - 1.0) / m) * head[1:] ** (1.0 / m)

    # allowance for the tail mass beyond the grid: 2 f(R) R covers any
    # integrand decay at least as fast as s^(-3/2) and vanishes exactly
    # for data that are zero (or negligible) at the boundary, keeping the
    # check sharp in the resolved regime
    allowance = 2.0 * float(tail_integrand[-1]) * pair.grid.extent
    rhs1 = c1 * powm(r[1:], -1.0 / m) * (tail[1:] + allowance) ** (1.0 / m)

    scale = max(float(np.max(np.abs(pair.u0))), 1e-300)
    inner = r[1:] <= 0.5 * pair.grid.extent
    v1 = np.abs(pair.u0[1:]) - rhs1
    v2 = np.abs(r[1:] * pair.u0[1:]) - rhs2
    viol1 = float(np.max(v1[inner] / scale)) if np.any(inner) else 0.0
    viol2 = float(np.max(v2 / (scale * np.maximum(r[1:], 1.0))))
    tol = 1e-6 + h**2
    return PointwiseBoundReport(max(viol1, 0.0), max(viol2, 0.0), tol)
