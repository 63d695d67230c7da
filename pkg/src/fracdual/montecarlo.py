"""Lagrangian simulators for the inverse subordinator and its dual process.

Particles are processed in fixed-size blocks; block ``k`` draws from a Philox
stream keyed by ``(seed, k)``, so results do not depend on the thread count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .params import Param, StableParams

BLOCK = 8192
_CHUNK_BUDGET = 1 << 21  # floats per vectorized chunk


@dataclass(frozen=True)
class Ensemble:
    seed: int
    n: int
    dt_walk: float = 0.05
    dx_path: float = 1e-3
    samples: np.ndarray | None = None
    accepted: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if not self.dt_walk > 0 or not self.dx_path > 0:
            raise ValueError("dt_walk and dx_path must be positive")


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FRACDUAL_THREADS", "1")))
    except ValueError:
        return 1


def _run_blocks(n: int, seed: int, work: Callable[[int, np.random.Generator], np.ndarray]) -> list[np.ndarray]:
    sizes = [min(BLOCK, n - k) for k in range(0, n, BLOCK)]
    jobs = [(size, block_rng(seed, i)) for i, size in enumerate(sizes)]
    threads = _threads()
    if threads == 1 or len(jobs) == 1:
        return [work(size, rng) for size, rng in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: work(*job), jobs))


def _st_beta(params: StableParams) -> tuple[float, float, float]:
    p = params.to(Param.ST_BETA)
    return p.alpha, p.asym, p.scale


def sample_stable(params: StableParams, rng: np.random.Generator, size=None) -> np.ndarray:
    """Exact stable variates by the Chambers-Mallows-Stuck transformation."""
    alpha, beta, sigma = _st_beta(params)
    tan_term = beta * math.tan(math.pi * alpha / 2)
    B = math.atan(tan_term) / alpha
    S = (1.0 + tan_term**2) ** (1.0 / (2.0 * alpha))
    V = math.pi * ((1.0 - rng.random(size)) - 0.5)  # uniform on (-pi/2, pi/2]
    W = rng.standard_exponential(size)
    aVB = alpha * (V + B)
    X = S * np.sin(aVB) / np.cos(V) ** (1.0 / alpha) * (np.cos(V - aVB) / W) ** ((1.0 - alpha) / alpha)
    return sigma * X


@lru_cache(maxsize=1)
def check_sign_convention(n: int = 10_000, seed: int = 20_240_101) -> float:
    """Guard against a flipped skewness: spectrally negative draws must be positive w.p. 1/alpha."""
    alpha = 1.5
    x = sample_stable(StableParams.spectrally_negative(alpha), block_rng(seed, 0), n)
    frac = float(np.mean(x > 0))
    p = 1.0 / alpha
    if abs(frac - p) > 5.0 * math.sqrt(p * (1 - p) / n):
        raise RuntimeError(f"stable generator sign convention broken: P(X > 0) = {frac:.4f}, expected {p:.4f}")
    return frac


def simulate_E(gamma: float, b: float, t_targets: Sequence[float], cfg: Ensemble) -> Ensemble:
    """Inverse subordinator ``E(t)`` at each target by inverting a simulated ``D`` path.

    ``samples`` has shape ``(n, len(t_targets))``.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    targets = np.asarray(t_targets, dtype=float)
    if targets.ndim != 1 or targets.size == 0 or np.any(targets <= 0) or np.any(np.diff(targets) < 0):
        raise ValueError("t_targets must be a nonempty sorted list of positive times")
    dx = cfg.dx_path
    inc_params = StableParams.subordinator(gamma, b * dx)
    t_last = targets[-1]

    def work(size: int, rng: np.random.Generator) -> np.ndarray:
        out = np.full((size, targets.size), np.nan)
        d = np.zeros(size)
        steps = np.zeros(size, dtype=np.int64)
        active = np.arange(size)
        while active.size:
            L = int(min(max(64, _CHUNK_BUDGET // active.size), 1 << 20))
            path = d[active, None] + np.cumsum(sample_stable(inc_params, rng, (active.size, L)), axis=1)
            for j, tt in enumerate(targets):
                todo = np.isnan(out[active, j]) & (path[:, -1] > tt)
                if not todo.any():
                    continue
                rows = np.nonzero(todo)[0]
                idx = np.argmax(path[rows] > tt, axis=1)
                d_hi = path[rows, idx]
                d_lo = np.where(idx > 0, path[rows, np.maximum(idx - 1, 0)], d[active[rows]])
                x_lo = (steps[active[rows]] + idx) * dx
                out[active[rows], j] = x_lo + dx * (tt - d_lo) / (d_hi - d_lo)
            d[active] = path[:, -1]
            steps[active] += L
            active = active[path[:, -1] <= t_last]
        return out

    samples = np.concatenate(_run_blocks(cfg.n, cfg.seed, work))
    return replace(cfg, samples=samples, accepted=cfg.n)


def simulate_Y_conditional(alpha: float, b: float, t: float, cfg: Ensemble) -> Ensemble:
    """Exact draws of ``Y(t)`` kept when positive; ``accepted/n`` estimates ``1/alpha``."""
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    check_sign_convention()
    params = StableParams.spectrally_negative(alpha, b ** (-alpha) * t)

    def work(size: int, rng: np.random.Generator) -> np.ndarray:
        return sample_stable(params, rng, size)

    y = np.concatenate(_run_blocks(cfg.n, cfg.seed, work))
    kept = y[y > 0]
    return replace(cfg, samples=kept, accepted=int(kept.size))


def simulate_Z(alpha: float, b: float, t: float, cfg: Ensemble) -> Ensemble:
    """Walk ``Y`` on the ``dt_walk`` grid, advancing a clock only while ``Y > 0``.

    Each sample is the position at the step where the positive-occupation
    clock first reaches ``t``.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    check_sign_convention()
    params = StableParams.spectrally_negative(alpha, b ** (-alpha) * cfg.dt_walk)
    need0 = max(1, math.ceil(t / cfg.dt_walk - 1e-9))

    def work(size: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(size)
        y = np.zeros(size)
        need = np.full(size, need0, dtype=np.int64)
        active = np.arange(size)
        while active.size:
            # negative excursions are heavy tailed, so the stragglers get long chunks
            L = int(min(max(4 * need0, _CHUNK_BUDGET // active.size), 1 << 22))
            path = y[active, None] + np.cumsum(sample_stable(params, rng, (active.size, L)), axis=1)
            count = np.cumsum(path > 0, axis=1)
            done = count[:, -1] >= need[active]
            if done.any():
                rows = np.nonzero(done)[0]
                idx = np.argmax(count[rows] >= need[active[rows], None], axis=1)
                out[active[rows]] = path[rows, idx]
            rest = ~done
            need[active[rest]] -= count[rest, -1]
            y[active[rest]] = path[rest, -1]
            active = active[rest]
        return out

    samples = np.concatenate(_run_blocks(cfg.n, cfg.seed, work))
    return replace(cfg, samples=samples, accepted=cfg.n)


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov distance ``sup |F_n - F|``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def histogram(samples, bins: int = 50, range_=None) -> tuple[np.ndarray, np.ndarray]:
    """Bin midpoints and normalized density of ``samples``."""
    dens, edges = np.histogram(samples, bins=bins, range=range_, density=True)
    return 0.5 * (edges[1:] + edges[:-1]), dens
