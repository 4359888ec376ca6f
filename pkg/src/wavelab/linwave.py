"""Exact linear propagation, Duhamel source solves, energy channels, and
the averaging-operator machinery behind the weak-type dispersive bound.

Everything here rides on U(t, r) = F(t+r) - F(t-r): grid-aligned times
are relabelings of the same cumulative-profile array, which is what
makes conservation and channel identities exact rather than approximate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CharProfile, RadialGrid, RadialPair, WindowError, from_characteristic
from .field import SpaceTimeField
from .quadrature import interval_trapezoid, powm, trapezoid_uniform


def propagate(prof: CharProfile, t: float, grid: RadialGrid | None = None) -> RadialPair:
    """Free evolution of the profile to time t (delegates to the transform)."""
    return from_characteristic(prof, t, grid)


def linear_field(
    prof: CharProfile,
    grid: RadialGrid,
    t0: float,
    n_frames: int,
    cone_A: float | None = None,
) -> SpaceTimeField:
    """Free solution frames at times t0 + i*h, all exact relabelings.

    Requires t0 grid-aligned and a window covering the extent plus the
    largest |t| visited.
    """
    h = grid.h
    k0 = prof.shift_index(t0)
    if k0 is None:
        raise ValueError("t0 must be grid-aligned for frame evolution")
    t_max = max(abs(t0), abs(t0 + (n_frames - 1) * h))
    if prof.window + 1e-9 * h < grid.extent + t_max:
        raise WindowError("window too small for the requested frames")
    n = grid.n
    F, fd = prof.F, prof.fdot
    U = np.empty((n_frames, n))
    Ut = np.empty((n_frames, n))
    for i in range(n_frames):
        c = prof.k_max + k0 + i
        U[i] = F[c : c + n] - F[c - n + 1 : c + 1][::-1]
        Ut[i] = fd[c : c + n] - fd[c - n + 1 : c + 1][::-1]
    return SpaceTimeField(grid, t0, U, Ut, cone_A)


# ---------------------------------------------------------------------------
# inhomogeneous solve


def duhamel_frames(f_frames: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """u frames of the zero-data solution of (d_tt - Lap)u = f.

    f_frames samples the radial source at times i*h.  Works on the
    characteristic lattice: with g(t, rho) = rho f(t, |rho|) and
    G(t, rho) = int_0^t g(s, rho - s) ds, the solution is
    u(t, r) = (1/2r) int_{t-r}^{t+r} G(t, rho) drho; G is accumulated
    frame to frame by trapezoid increments along characteristics.
    """
    f_frames = np.asarray(f_frames, dtype=float)
    n_frames, n = f_frames.shape
    if n != grid.n:
        raise ValueError("source frames do not match the grid")
    h = grid.h
    T = n_frames - 1
    # rho-grid indices -(n-1+T) .. (n-1+T); g vanishes for |rho| beyond the grid
    half = n - 1 + T
    rho_idx = np.arange(-half, half + 1)
    rho = h * rho_idx

    def g_row(i: int, shift: int) -> np.ndarray:
        """g(s_i, rho - s_i) on the rho-grid; shift = i (s_i = i*h)."""
        k = rho_idx - shift
        j = np.abs(k)
        inside = j <= n - 1
        vals = np.where(inside, f_frames[i][np.minimum(j, n - 1)], 0.0)
        return (h * k) * vals

    u = np.zeros((n_frames, n))
    G = np.zeros(len(rho))
    prev = g_row(0, 0)
    center = half
    for i in range(1, n_frames):
        cur = g_row(i, i)
        G = G + 0.5 * h * (prev + cur)
        prev = cur
        PG = np.concatenate(([0.0], np.cumsum(0.5 * h * (G[:-1] + G[1:]))))
        c = center + i
        u[i, 1:] = (PG[c + 1 : c + n] - PG[c - n + 1 : c][::-1]) / (2.0 * grid.r[1:])
        u[i, 0] = G[c]
    return u


def duhamel(f_frames: np.ndarray, grid: RadialGrid, t: float) -> RadialPair:
    """Zero-data inhomogeneous solution evaluated at grid-aligned time t.

    Returns the pair (u(t), du/dt(t)); the time derivative comes from the
    exact identity d_t(ru) = (G(t, t+r) - G(t, t-r))/2 (the bulk term
    vanishes by oddness of g).
    """
    f_frames = np.asarray(f_frames, dtype=float)
    h = grid.h
    N = t / h
    i_t = int(round(N))
    if abs(N - i_t) > 1e-9 * max(1.0, abs(N)) or not 0 <= i_t < f_frames.shape[0]:
        raise ValueError("t must be a grid-aligned time covered by the source frames")
    n = grid.n
    half = n - 1 + (f_frames.shape[0] - 1)
    rho_idx = np.arange(-half, half + 1)

    G = np.zeros(len(rho_idx))
    prev = None
    for i in range(i_t + 1):
        k = rho_idx - i
        j = np.abs(k)
        inside = j <= n - 1
        cur = (h * k) * np.where(inside, f_frames[i][np.minimum(j, n - 1)], 0.0)
        if prev is not None:
            G += 0.5 * h * (prev + cur)
        prev = cur
    PG = np.concatenate(([0.0], np.cumsum(0.5 * h * (G[:-1] + G[1:]))))
    c = half + i_t
    r = grid.r
    u0 = np.empty(n)
    u1 = np.empty(n)
    du0 = np.empty(n)
    u0[1:] = (PG[c + 1 : c + n] - PG[c - n + 1 : c][::-1]) / (2.0 * r[1:])
    u0[0] = G[c]
    Gp = G[c : c + n]
    Gm = G[c - n + 1 : c + 1][::-1]
    u1[1:] = (Gp[1:] - Gm[1:]) / (2.0 * r[1:])
    u1[0] = (G[c + 1] - G[c - 1]) / (2.0 * h)
    drv = 0.5 * (Gp + Gm)
    du0[1:] = (drv[1:] - u0[1:]) / r[1:]
    du0[0] = 0.0
    return RadialPair(grid, u0, u1, du0)


def s_norm_tail_estimate(field, m: float) -> float:
    """Estimated dispersive-norm mass beyond the last computed frame.

    Along the light cone the field decays pointwise like r^(-1/m), which
    makes the inner integrand of the dispersive norm decay like t^(-2m);
    extrapolating gives int_T^inf ~ g(T) T / (2m - 1) for the outer
    integral, reported so "global" norms carry their truncation size.
    """
    from .quadrature import powered_integral

    r = field.grid.r
    p = (2.0 * m + 1.0) * m
    g_last = powered_integral(r, field.u[-1], p, m, 1.0 / m)
    T = abs(float(field.times[-1]))
    return g_last * T / (2.0 * m - 1.0)


# ---------------------------------------------------------------------------
# exterior-energy channels


@dataclass
class ChannelReport:
    """Exterior transport energy split into left/right-moving channels.

    left  = int_{sigma <= -R} |2 Fdot|^m, the eventual (t -> +inf) channel,
    right = int_{sigma >= +R} |2 Fdot|^m, the eventual (t -> -inf) channel,
    lhs   = int_R^inf |d(r v0)/dr|^m + |r v1|^m dr, the exterior data quantity.

    Convexity gives left + right >= lhs at the quadrature level, hence the
    dichotomy max(inf_{t>=0}, inf_{t<=0}) >= lhs/2.
    """

    R: float
    m: float
    left: float
    right: float
    lhs: float
    t_samples: np.ndarray
    exterior_pos: np.ndarray
    exterior_neg: np.ndarray

    @property
    def inf_pos(self) -> float:
        return self.left

    @property
    def inf_neg(self) -> float:
        return self.right

    @property
    def dichotomy_margin(self) -> float:
        """max(inf over t>=0, inf over t<=0) - lhs/2 (nonnegative up to roundoff)."""
        return max(self.left, self.right) - 0.5 * self.lhs

    @property
    def dichotomy_holds(self) -> bool:
        return max(self.left, self.right) >= 0.5 * self.lhs * (1.0 - 1e-12)


def channel_report(prof: CharProfile, m: float, R: float, t_samples=()) -> ChannelReport:
    """Exterior-energy channels of the free wave with profile `prof`.

    Exterior energy at time t in the transport gauge is exactly (change
    of variables on the shift formulas):

        t >= 0:  int_{R+2t}^{inf} |2 Fdot|^m + int_{-inf}^{-R} |2 Fdot|^m
        t <= 0:  int_R^{inf} |2 Fdot|^m + int_{-inf}^{-R+2t} |2 Fdot|^m

    so the two infima are the left/right channel masses.
    """
    if R < 0:
        raise ValueError("R must be nonnegative")
    t_samples = np.asarray(list(t_samples), dtype=float)
    t_need = 2.0 * float(np.max(np.abs(t_samples))) if len(t_samples) else 0.0
    if prof.window + 1e-9 * prof.h < R + t_need:
        raise WindowError("window does not cover R + 2 max|t|")
    sig = prof.sigma
    dens = powm(2.0 * prof.fdot, m)
    left = interval_trapezoid(sig, dens, b=-R)
    right = interval_trapezoid(sig, dens, a=R)

    # exterior data quantity from the profile samples at t = 0
    n = prof.k_max + 1
    fp = prof.fdot[prof.k_max :]
    fm = prof.fdot[: prof.k_max + 1][::-1]
    integrand = powm(fp + fm, m) + powm(fp - fm, m)
    r = prof.h * np.arange(n)
    lhs = interval_trapezoid(r, integrand, a=R)

    ext_pos = np.array(
        [interval_trapezoid(sig, dens, a=R + 2.0 * abs(t)) + left for t in t_samples]
    )
    ext_neg = np.array(
        [right + interval_trapezoid(sig, dens, b=-R - 2.0 * abs(t)) for t in t_samples]
    )
    return ChannelReport(R, m, left, right, lhs, t_samples, ext_pos, ext_neg)


# ---------------------------------------------------------------------------
# Hardy-Littlewood maximal function (uncentered, exact on the sample lattice)


def _hull_tangent_slope(hull_x, hull_y, xa: float, ya: float) -> float:
    """Max slope from (xa, ya) to an upper-convex chain, binary search on the peak."""
    lo, hi = 0, len(hull_x) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        s_mid = (hull_y[mid] - ya) / (hull_x[mid] - xa)
        s_next = (hull_y[mid + 1] - ya) / (hull_x[mid + 1] - xa)
        if s_next >= s_mid:
            lo = mid + 1
        else:
            hi = mid
    return (hull_y[lo] - ya) / (hull_x[lo] - xa)


def _upper_hull(xs: np.ndarray, ys: np.ndarray) -> tuple[list, list]:
    hx: list = []
    hy: list = []
    for x, y in zip(xs, ys):
        while len(hx) >= 2 and (hy[-1] - hy[-2]) * (x - hx[-1]) <= (y - hy[-1]) * (hx[-1] - hx[-2]):
            hx.pop()
            hy.pop()
        hx.append(x)
        hy.append(y)
    return hx, hy


def _lower_hull(xs: np.ndarray, ys: np.ndarray) -> tuple[list, list]:
    hx, hy = _upper_hull(xs, -np.asarray(ys))
    return hx, list(-np.asarray(hy))


def maximal_function(G: np.ndarray) -> np.ndarray:
    """Uncentered Hardy-Littlewood maximal function of uniform samples.

    M[i] = max over index windows [a..b] containing i of mean(|G|[a..b]),
    computed exactly: window averages are chord slopes of the prefix-sum
    graph, and a divide-and-conquer over crossing windows reduces each
    half to tangent queries against one convex hull.  Dominates |G|
    pointwise by the singleton window.
    """
    g = np.abs(np.asarray(G, dtype=float))
    n = len(g)
    P = np.concatenate(([0.0], np.cumsum(g)))
    M = g.copy()

    def solve(lo: int, hi: int) -> None:
        if lo >= hi:
            return
        mid = (lo + hi) // 2
        # windows crossing the cut: a in [lo..mid], b in [mid+1..hi]
        xs_r = np.arange(mid + 2, hi + 2)
        hx, hy = _upper_hull(xs_r, P[xs_r])
        best_a = np.array(
            [_hull_tangent_slope(hx, hy, a, P[a]) for a in range(lo, mid + 1)]
        )
        np.maximum.accumulate(best_a, out=best_a)
        np.maximum(M[lo : mid + 1], best_a, out=M[lo : mid + 1])

        xs_l = np.arange(lo, mid + 1)
        lx, ly = _lower_hull(xs_l, P[xs_l])
        lx_neg = [-x for x in lx[::-1]]
        ly_neg = [-y for y in ly[::-1]]
        best_b = np.array(
            [_hull_tangent_slope(lx_neg, ly_neg, -(b + 1), -P[b + 1]) for b in range(mid + 1, hi + 1)]
        )
        best_b = best_b[::-1]
        np.maximum.accumulate(best_b, out=best_b)
        best_b = best_b[::-1]
        np.maximum(M[mid + 1 : hi + 1], best_b, out=M[mid + 1 : hi + 1])

        solve(lo, mid)
        solve(mid + 1, hi)

    solve(0, n - 1)
    return M


def maximal_function_bruteforce(G: np.ndarray) -> np.ndarray:
    """Quadratic reference implementation (tests only)."""
    g = np.abs(np.asarray(G, dtype=float))
    n = len(g)
    P = np.concatenate(([0.0], np.cumsum(g)))
    M = np.zeros(n)
    for a in range(n):
        for b in range(a, n):
            avg = (P[b + 1] - P[a]) / (b + 1 - a)
            if avg > 0:
                lo, hi = a, b
                M[lo : hi + 1] = np.maximum(M[lo : hi + 1], avg)
    return M


# ---------------------------------------------------------------------------
# weak-type mechanism for the averaging operator T G = (1/2r) int_{t-r}^{t+r} G


@dataclass
class WeakTypeReport:
    alpha: float
    l1: float
    sup_level_mass: float  # sup_l l^alpha mu(E_l)
    ratio: float  # sup / ||G||_1^alpha
    dilation_rel_diff: float

    @property
    def quasinorm(self) -> float:
        return self.sup_level_mass ** (1.0 / self.alpha)


def _averaging_lattice(G: np.ndarray, h: float, alpha: float, r_cells: int, t_pad: int):
    """|T G| and level-set measure weights on an aligned (t, r) lattice."""
    ns = len(G)
    PG = np.concatenate(([0.0], np.cumsum(0.5 * h * (np.abs(G[:-1]) + np.abs(G[1:])))))

    def P_at(idx: np.ndarray) -> np.ndarray:
        return PG[np.clip(idx, 0, ns - 1)]

    t_idx = np.arange(-t_pad, ns + t_pad)
    r_idx = np.arange(1, r_cells + 1)
    tt = t_idx[:, None]
    rr = r_idx[None, :]
    vals = (P_at(tt + rr) - P_at(tt - rr)) / (2.0 * h * rr)
    from .norms import _radial_cell_measure

    w = _radial_cell_measure(h * r_idx.astype(float), h, alpha) * h
    return vals, np.broadcast_to(w, vals.shape)


def _sup_level_mass(vals: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    flat = np.abs(vals).ravel()
    w = weights.ravel()
    order = np.argsort(flat)[::-1]
    fs = flat[order]
    ws = np.cumsum(w[order])
    keep = fs > 0
    if not np.any(keep):
        return 0.0
    return float(np.max(fs[keep] ** alpha * ws[keep]))


def weak_type_check(
    G: np.ndarray,
    h: float,
    alpha: float,
    r_cells: int | None = None,
    t_pad: int | None = None,
    dilation: int = 3,
) -> WeakTypeReport:
    """Level-set bound for the characteristic average of G.

    Computes sup_l l^alpha iint_{|T G| > l} r^(alpha-2) dr dt over the
    realized lattice levels, its ratio to ||G||_1^alpha, and the relative
    change of that ratio under the exact dilation G -> G(./k) realized by
    rescaling the grid (both sides are homogeneous, so the ratio must be
    invariant).
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    G = np.asarray(G, dtype=float)
    ns = len(G)
    if r_cells is None:
        r_cells = 2 * ns
    if t_pad is None:
        t_pad = 2 * ns
    l1 = trapezoid_uniform(np.abs(G), h)
    if l1 == 0.0:
        return WeakTypeReport(alpha, 0.0, 0.0, 0.0, 0.0)
    vals, w = _averaging_lattice(G, h, alpha, r_cells, t_pad)
    sup = _sup_level_mass(vals, w, alpha)
    ratio = sup / l1**alpha

    # dilation by an integer factor: same samples on a grid with spacing k*h
    hk = dilation * h
    l1k = trapezoid_uniform(np.abs(G), hk)
    vals_k, w_k = _averaging_lattice(G, hk, alpha, r_cells, t_pad)
    ratio_k = _sup_level_mass(vals_k, w_k, alpha) / l1k**alpha
    rel = abs(ratio_k - ratio) / ratio if ratio > 0 else 0.0
    return WeakTypeReport(alpha, l1, sup, ratio, rel)


def weak_type_bruteforce_ratio(
    G: np.ndarray, h: float, alpha: float, r_cells: int, t_pad: int, n_levels: int = 1000
) -> float:
    """Dumb double loop over a level grid (small-instance oracle)."""
    vals, w = _averaging_lattice(G, h, alpha, r_cells, t_pad)
    l1 = trapezoid_uniform(np.abs(G), h)
    av = np.abs(vals)
    levels = np.unique(av[av > 0])
    if len(levels) > n_levels:
        levels = levels[:: len(levels) // n_levels]
    best = 0.0
    for lam in levels:
        mass = float(np.sum(w[av >= lam]))
        best = max(best, lam**alpha * mass)
    return best / l1**alpha
