"""Space-time sample container shared by the linear and nonlinear solvers.

Frames are stored in the transport gauge U = r*u together with
Ut = d(r*u)/dt, at times t0 + i*h with dt = h exactly (the exact-transport
CFL choice), so grid-aligned time shifts stay exact relabelings.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import RadialGrid, RadialPair


@dataclass
class SpaceTimeField:
    """Frames of U = r*u and Ut = d(r*u)/dt on a shared radial grid.

    cone_A records the truncation apex when the evolution only applied
    the nonlinear source on {r >= (A+|t|)_+}; None means untruncated.
    """

    grid: RadialGrid
    t0: float
    U: np.ndarray
    Ut: np.ndarray
    cone_A: float | None = None

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        self.Ut = np.asarray(self.Ut, dtype=float)
        if self.U.ndim != 2 or self.U.shape[1] != self.grid.n:
            raise ValueError("U frames must have shape (n_frames, grid.n)")
        if self.U.shape != self.Ut.shape:
            raise ValueError("U and Ut frame shapes differ")

    @property
    def n_frames(self) -> int:
        return self.U.shape[0]

    @cached_property
    def times(self) -> np.ndarray:
        return self.t0 + self.grid.h * np.arange(self.n_frames)

    @cached_property
    def u(self) -> np.ndarray:
        """Pointwise u = U/r; the r = 0 column uses the odd-extension limit."""
        r = self.grid.r
        out = np.empty_like(self.U)
        out[:, 1:] = self.U[:, 1:] / r[1:]
        out[:, 0] = (8.0 * self.U[:, 1] - self.U[:, 2]) / (6.0 * self.grid.h)
        return out

    @cached_property
    def ut(self) -> np.ndarray:
        r = self.grid.r
        out = np.empty_like(self.Ut)
        out[:, 1:] = self.Ut[:, 1:] / r[1:]
        out[:, 0] = (8.0 * self.Ut[:, 1] - self.Ut[:, 2]) / (6.0 * self.grid.h)
        return out

    def drv_frames(self) -> np.ndarray:
        """d/dr of U, centered two-point stencil with odd reflection at r = 0.

        The centered stencil commutes with grid-aligned shifts, which keeps
        scattering pullbacks of exactly-transported fields drift-free.
        """
        h = self.grid.h
        d = np.empty_like(self.U)
        d[:, 1:-1] = (self.U[:, 2:] - self.U[:, :-2]) / (2.0 * h)
        d[:, 0] = self.U[:, 1] / h
        d[:, -1] = -self.U[:, -2] / (2.0 * h)
        return d

    def frame_pair(self, i: int) -> RadialPair:
        """Data pair (u, du/dt) of frame i, with du0 from the lattice stencil."""
        r = self.grid.r
        u0 = self.u[i]
        u1 = self.ut[i]
        drv = self.drv_frames()[i]
        du0 = np.empty_like(u0)
        du0[1:] = (drv[1:] - u0[1:]) / r[1:]
        du0[0] = 0.0
        return RadialPair(self.grid, u0, u1, du0)

    def index_of_time(self, t: float) -> int:
        k = (t - self.t0) / self.grid.h
        i = int(round(k))
        if abs(k - i) > 1e-9 * max(1.0, abs(k)) or not 0 <= i < self.n_frames:
            raise ValueError(f"time {t} is not a stored frame")
        return i

    @classmethod
    def from_u(
        cls,
        grid: RadialGrid,
        t0: float,
        u_frames: np.ndarray,
        ut_frames: np.ndarray | None = None,
        cone_A: float | None = None,
    ) -> "SpaceTimeField":
        u_frames = np.asarray(u_frames, dtype=float)
        U = u_frames * grid.r
        if ut_frames is None:
            Ut = np.zeros_like(U)
        else:
            Ut = np.asarray(ut_frames, dtype=float) * grid.r
        return cls(grid, t0, U, Ut, cone_A)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        if not self.grid.compatible(other.grid) or self.n_frames != other.n_frames:
            raise ValueError("fields not aligned")
        return SpaceTimeField(self.grid, self.t0, self.U - other.U, self.Ut - other.Ut, self.cone_A)
