"""Explicit shifted-Grünwald solvers for space-fractional diffusion.

The one-sided solver integrates

    dh/dt = b^-alpha d^alpha h / d(-x)^alpha   on x > 0,

with the zero-flux condition ``d^(alpha-1) h / d(-x)^(alpha-1) = 0`` at the
origin, starting from a point source at ``x = 0``.  Its solution is the
density of the inverse stable subordinator with ``gamma = 1/alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import toeplitz

from .errors import CFLViolation, GridMismatchError

_INT_TOL = 1e-9


def grunwald_weights(order: float, n_max: int) -> np.ndarray:
    """``w_n = (-1)^n binom(order, n)`` for ``n = 0..n_max`` by the stable recurrence."""
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    w = np.empty(n_max + 1)
    w[0] = 1.0
    for n in range(1, n_max + 1):
        w[n] = w[n - 1] * (n - 1 - order) / n
    return w


@dataclass(frozen=True)
class TwoSided:
    """Coefficients of ``dp/dt = q A d^delta p/d(-x)^delta + (1-q) A d^delta p/dx^delta``."""

    q: float
    delta: float
    a: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if not 1.0 < self.delta <= 2.0:
            raise ValueError(f"two-sided solver needs 1 < delta <= 2, got {self.delta}")
        if not self.a > 0:
            raise ValueError(f"a must be positive for 1 < delta <= 2, got {self.a}")


def _is_integer(r: float) -> bool:
    return abs(r - round(r)) <= _INT_TOL * max(1.0, abs(r))


@dataclass(frozen=True)
class SolverConfig:
    """Grid and scheme parameters.  ``dt=None`` picks the largest stable step."""

    alpha: float
    dx: float
    x_max: float
    t_end: float
    b: float = 1.0
    dt: float | None = None
    weights_cap: int | None = None
    two_sided: TwoSided | None = None
    cfl_safety: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        for name in ("dx", "x_max", "t_end", "b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not _is_integer(self.x_max / self.dx):
            raise ValueError(f"x_max/dx must be an integer, got {self.x_max / self.dx}")
        if self.weights_cap is not None and self.weights_cap < 2:
            raise ValueError("weights_cap must be at least 2")
        if self.dt is None:
            steps = math.ceil(self.t_end / (self.cfl_safety * self.dt_max) - _INT_TOL)
            object.__setattr__(self, "dt", self.t_end / max(steps, 1))
        elif not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not _is_integer(self.t_end / self.dt):
            raise ValueError(f"t_end/dt must be an integer, got {self.t_end / self.dt}")

    @property
    def dt_max(self) -> float:
        """Largest step keeping the diagonal coefficient nonnegative."""
        if self.two_sided is not None:
            ts = self.two_sided
            return self.dx**ts.delta / (ts.delta * ts.a)
        return (self.b * self.dx) ** self.alpha / self.alpha

    @property
    def n_nodes(self) -> int:
        return int(round(self.x_max / self.dx)) + 1

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def coefficient(self) -> float:
        """``dt (b dx)^-alpha``: multiplier of the Grünwald sum in one step."""
        return self.dt * (self.b * self.dx) ** (-self.alpha)

    def check_cfl(self):
        if self.dt > self.dt_max * (1.0 + 1e-12):
            raise CFLViolation(
                f"dt = {self.dt:.6g} exceeds the stability bound {self.dt_max:.6g} "
                f"for dx = {self.dx:g}"
            )


@dataclass
class DensityGrid:
    """Samples of a density on ``x0 + i*dx``; ``values`` is 1-D or (time, space)."""

    x0: float
    dx: float
    values: np.ndarray
    t: float | np.ndarray = 0.0

    @property
    def x(self) -> np.ndarray:
        n = self.values.shape[-1]
        return self.x0 + self.dx * np.arange(n)

    def mass(self) -> float | np.ndarray:
        return self.values.sum(axis=-1) * self.dx

    def final(self) -> "DensityGrid":
        if self.values.ndim == 1:
            return self
        t = self.t[-1] if np.ndim(self.t) else self.t
        return DensityGrid(self.x0, self.dx, self.values[-1].copy(), float(t))


@lru_cache(maxsize=32)
def _negative_operator(n: int, order: float, cap: int) -> np.ndarray:
    """Matrix with ``(A h)_i = sum_k w_k h_(i+k-1)``, zeros beyond the grid."""
    w = grunwald_weights(order, max(n, 1))
    w[cap + 1 :] = 0.0
    col = np.zeros(n)
    col[0] = w[1]
    if n > 1:
        col[1] = w[0]
    A = toeplitz(col, w[1 : n + 1])
    A.setflags(write=False)
    return A


def _cap(cfg: SolverConfig, n: int) -> int:
    return n if cfg.weights_cap is None else cfg.weights_cap


def apply_boundary(grid: DensityGrid, cfg: SolverConfig) -> DensityGrid:
    """Set ``h_0`` so that the order ``alpha - 1`` Grünwald sum at the origin vanishes."""
    h = grid.values.copy()
    n = h.shape[-1]
    v = grunwald_weights(cfg.alpha - 1.0, n - 1)
    v[_cap(cfg, n) + 1 :] = 0.0
    h[..., 0] = -(h[..., 1:] @ v[1:])
    return DensityGrid(grid.x0, grid.dx, h, grid.t)


def boundary_residual(grid: DensityGrid, cfg: SolverConfig) -> float:
    """Order ``alpha - 1`` Grünwald sum at node 0 (zero after :func:`apply_boundary`)."""
    v = grunwald_weights(cfg.alpha - 1.0, grid.values.shape[-1] - 1)
    return float(grid.values @ v)


def step_explicit_euler(grid: DensityGrid, cfg: SolverConfig) -> DensityGrid:
    """Advance one explicit Euler step and re-impose the boundary row."""
    cfg.check_cfl()
    h = grid.values
    n = h.size
    if n < 3:
        raise ValueError("grid needs at least 3 nodes")
    A = _negative_operator(n, cfg.alpha, _cap(cfg, n))
    new = h + cfg.coefficient * (A @ h)
    return apply_boundary(DensityGrid(grid.x0, grid.dx, new, grid.t + cfg.dt), cfg)


def point_source(cfg: SolverConfig) -> DensityGrid:
    """Unit mass on node 1, with the boundary row already consistent.

    Node 0 is fixed by the boundary row, so a source placed there would be
    overwritten after the first step and only ``dt (b dx)^-alpha`` of it would
    survive.  With the boundary row in force, ``sum_{i>=1} h_i dx`` is
    conserved exactly by the interior update.
    """
    h = np.zeros(cfg.n_nodes)
    h[1] = 1.0 / cfg.dx
    return apply_boundary(DensityGrid(0.0, cfg.dx, h, 0.0), cfg)


def interior_mass(grid: DensityGrid) -> float | np.ndarray:
    """Mass carried by nodes ``1..N``; invariant under :func:`step_explicit_euler`."""
    return grid.values[..., 1:].sum(axis=-1) * grid.dx


def solve_bvp(cfg: SolverConfig, history: bool = False) -> DensityGrid:
    """Point-source solution on ``[0, x_max]`` up to ``t_end``."""
    cfg.check_cfl()
    grid = point_source(cfg)
    frames = [grid.values]
    for _ in range(cfg.n_steps):
        grid = step_explicit_euler(grid, cfg)
        if history:
            frames.append(grid.values)
    if history:
        times = cfg.dt * np.arange(cfg.n_steps + 1)
        return DensityGrid(0.0, cfg.dx, np.array(frames), times)
    grid.t = cfg.t_end
    return grid


def richardson_extrapolate(fine: DensityGrid, coarse: DensityGrid) -> DensityGrid:
    """Remove the first-order error: ``2 fine - coarse`` at shared nodes.

    The correction ``coarse - fine`` is linearly interpolated onto fine-only nodes.
    """
    f, c = fine.final(), coarse.final()
    if abs(c.dx - 2.0 * f.dx) > 1e-12 * c.dx:
        raise GridMismatchError(f"coarse dx {c.dx} is not twice fine dx {f.dx}")
    if abs(c.x0 - f.x0) > 1e-12 * max(1.0, abs(f.x0)):
        raise GridMismatchError("grids have different origins")
    if not np.isclose(float(c.t), float(f.t), rtol=1e-12, atol=1e-14):
        raise GridMismatchError(f"grids are at different times: {f.t} vs {c.t}")
    nf = f.values.size
    if (nf - 1) % 2 or (nf - 1) // 2 + 1 != c.values.size:
        raise GridMismatchError(f"{c.values.size} coarse nodes do not nest in {nf} fine nodes")
    corr_shared = c.values - f.values[::2]
    corr = np.interp(f.x, c.x, corr_shared)
    return DensityGrid(f.x0, f.dx, f.values - corr, f.t)


def solve_richardson(cfg: SolverConfig) -> tuple[DensityGrid, DensityGrid, DensityGrid]:
    """Run at ``dx`` and ``2 dx``; returns ``(extrapolated, fine, coarse)``."""
    coarse_cfg = replace(cfg, dx=2.0 * cfg.dx, dt=None)
    fine = solve_bvp(cfg)
    coarse = solve_bvp(coarse_cfg)
    return richardson_extrapolate(fine, coarse), fine, coarse


def two_sided_operator(n: int, delta: float, q: float) -> np.ndarray:
    A = _negative_operator(n, delta, n)
    return q * A + (1.0 - q) * A.T


def solve_two_sided(cfg: SolverConfig, history: bool = False) -> DensityGrid:
    """Point-source solution of the two-sided equation on ``[-x_max, x_max]``.

    Values outside the interval are taken as zero, so mass leaks through the ends.
    """
    ts = cfg.two_sided
    if ts is None:
        raise ValueError("solve_two_sided needs cfg.two_sided")
    cfg.check_cfl()
    m = cfg.n_nodes - 1
    n = 2 * m + 1
    p = np.zeros(n)
    p[m] = 1.0 / cfg.dx
    L = two_sided_operator(n, ts.delta, ts.q) * (cfg.dt * ts.a * cfg.dx ** (-ts.delta))
    frames = [p]
    for _ in range(cfg.n_steps):
        p = p + L @ p
        if history:
            frames.append(p)
    if history:
        return DensityGrid(-cfg.x_max, cfg.dx, np.array(frames), cfg.dt * np.arange(cfg.n_steps + 1))
    return DensityGrid(-cfg.x_max, cfg.dx, p, cfg.t_end)


def caputo_l1(values: Sequence[float], tau: float, gamma: float) -> float:
    """L1 approximation of the Caputo derivative at the last of equally spaced samples."""
    f = np.asarray(values, dtype=float)
    n = f.size - 1
    j = np.arange(n, dtype=float)
    bj = (j + 1.0) ** (1.0 - gamma) - j ** (1.0 - gamma)
    diffs = f[n:0:-1] - f[n - 1 :: -1]
    return tau ** (-gamma) / math.gamma(2.0 - gamma) * float(np.dot(bj, diffs))


def caputo_residual(
    field: Callable[[float, float], float],
    gamma: float,
    b: float,
    xs: Sequence[float],
    ts: Sequence[float],
    tau: float,
    dx: float,
) -> np.ndarray:
    """``b * Caputo_t[field] + d field/dx`` on the probe set ``xs x ts``.

    ``field(x, 0)`` must return the initial value.  Each probe time must be a
    multiple of ``tau``.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    out = np.empty((len(xs), len(ts)))
    for i, x in enumerate(xs):
        for j, t in enumerate(ts):
            r = t / tau
            if not _is_integer(r):
                raise ValueError(f"probe time {t} is not a multiple of tau={tau}")
            n = int(round(r))
            samples = [field(x, k * tau) for k in range(n + 1)]
            dudx = (field(x + dx, t) - field(x - dx, t)) / (2.0 * dx)
            out[i, j] = b * caputo_l1(samples, tau, gamma) + dudx
    return out
