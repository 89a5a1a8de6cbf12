"""Monte Carlo side of the conditioned-diffusion representation.

Simulates planar Brownian motion conditioned to leave the upper half-plane at
the lattice point 2 pi n (drift = grad p_n / p_n), accumulates the rotated
martingale-transform functional along paths, and checks the occupation
measure against its closed-form density p_n G / p_n(start).

The Euler scheme uses drift taming b dt/(1 + dt |b|) so single steps stay
bounded near the boundary pole, and a height-adaptive step
dt_k = clip(step_scale * y^2, dt, dt_cap): the fields vary on scale y, so the
relative step error stays uniform while descents from large heights remain
affordable.  The base dt applies inside the boundary layer and must satisfy
dt <= kill_eps^2/4 so the layer is resolved.

Paths are simulated in fixed-size vectorized chunks with per-chunk derived
random streams; identical (config, seed, paths) inputs give bit-identical
results.  Statistical acceptance is always "within 3 standard errors".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from dhtlab.identities import PlanePoint, green_G, poisson_p
from dhtlab.numerics import _gk_eval  # fixed rule for expected-occupation cells
from dhtlab.seqops import Seq

__all__ = [
    "SdeConfig",
    "PathStats",
    "PathSample",
    "OccupationGrid",
    "OccupationReport",
    "drift_field",
    "simulate_path",
    "estimate_T",
    "occupation_check",
    "expected_occupation",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SdeConfig:
    """Configuration of one conditioned-diffusion simulation.

    ``n`` is the target lattice site (absorption at 2 pi n); ``start`` the
    launch point (x0, y0); ``dt`` the boundary-layer step; ``kill_eps`` the
    absorption height; ``match_radius`` the horizontal half-width of the
    absorption window around the target.  The window must stay pole-scale
    (default 5 kill_eps): the conditioned process can only exit at the pole,
    and a low pass far from it gets pushed back up by the 1/y drift, so a
    wide window would truncate genuine excursions.  ``step_scale`` and
    ``dt_cap`` control the height-adaptive step.
    """

    n: int
    start: tuple[float, float]
    dt: float = 1e-4
    kill_eps: float = 2e-2
    max_time: float = 1e3
    seed: int = 0
    match_radius: float = 0.1
    step_scale: float = 2.5e-3
    dt_cap: float = 5.0

    def __post_init__(self):
        if not (self.dt > 0 and self.kill_eps > 0):
            raise ValueError("dt and kill_eps must be positive")
        if self.dt > self.kill_eps ** 2 / 4.0:
            raise ValueError("need dt <= kill_eps^2/4 to resolve the boundary layer")
        if not self.start[1] > 0:
            raise ValueError("start height must be positive")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")


@dataclass(frozen=True)
class PathStats:
    mean: float
    std_error: float
    paths: int
    killed_fraction: float


@dataclass(frozen=True)
class PathSample:
    value: float
    absorbed: bool
    lifetime: float
    end: tuple[float, float]


@dataclass(frozen=True)
class OccupationGrid:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.y_min > 0 and self.y_max > self.y_min
                and self.x_max > self.x_min and self.nx > 0 and self.ny > 0):
            raise ValueError("invalid occupation grid")

    @property
    def cells(self) -> int:
        return self.nx * self.ny


@dataclass(frozen=True)
class OccupationReport:
    observed: np.ndarray      # (ny, nx) mean occupation time per path
    expected: np.ndarray      # (ny, nx) closed-form cell integrals
    std_error: np.ndarray     # (ny, nx)
    z: np.ndarray             # (ny, nx)
    paths: int
    max_abs_z: float
    frac_within_3: float
    chi2: float
    chi2_z: float
    total_z: float


def drift_field(cfg: SdeConfig, x, y):
    """grad p_n / p_n = (-2(x - 2 pi n)/r^2, 1/y - 2y/r^2), r^2 = (x-2pi n)^2 + y^2."""
    xt = np.asarray(x, dtype=float) - _TWO_PI * cfg.n
    y = np.asarray(y, dtype=float)
    r2 = xt * xt + y * y
    return -2.0 * xt / r2, 1.0 / y - 2.0 * y / r2


def _grad_log_h(x, y):
    """(d/dx, d/dy) of log h, stable for all heights."""
    glx = np.empty_like(x)
    gly = np.empty_like(x)
    lo = y <= 1.0
    if lo.any():
        xl, yl = x[lo], y[lo]
        denom = 2.0 * (np.sinh(yl / 2.0) ** 2 + np.sin(xl / 2.0) ** 2)
        glx[lo] = -np.sin(xl) / denom
        gly[lo] = np.cosh(yl) / np.sinh(yl) - np.sinh(yl) / denom
    hi = ~lo
    if hi.any():
        xh, yh = x[hi], y[hi]
        t = np.exp(-yh)
        denom = 1.0 + t * t - 2.0 * t * np.cos(xh)
        glx[hi] = -2.0 * t * np.sin(xh) / denom
        gly[hi] = (1.0 + t * t) / (1.0 - t * t) - (1.0 - t * t) / denom
    return glx, gly


def _h_value(x, y):
    """h = sinh y / (2 pi (cosh y - cos x)) without overflow."""
    out = np.empty_like(x)
    lo = y <= 1.0
    if lo.any():
        xl, yl = x[lo], y[lo]
        denom = 2.0 * (np.sinh(yl / 2.0) ** 2 + np.sin(xl / 2.0) ** 2)
        out[lo] = np.sinh(yl) / (_TWO_PI * denom)
    hi = ~lo
    if hi.any():
        xh, yh = x[hi], y[hi]
        t = np.exp(-yh)
        out[hi] = (1.0 - t * t) / (_TWO_PI * (1.0 + t * t - 2.0 * t * np.cos(xh)))
    return out


def _functional_rows(x, y, glx, gly, dx, dy, ms):
    """F_m = H grad(p_m / h) . d for every support site m; rows (len(ms), len(x))."""
    h = _h_value(x, y)
    rows = np.empty((len(ms), len(x)))
    for i, m in enumerate(ms):
        xm = x - _TWO_PI * m
        r2 = xm * xm + y * y
        pm = y / (math.pi * r2)
        pmx = -2.0 * xm * y / (math.pi * r2 * r2)
        pmy = (xm * xm - y * y) / (math.pi * r2 * r2)
        um = pm / h
        ux = pmx / h - um * glx
        uy = pmy / h - um * gly
        rows[i] = -uy * dx + ux * dy
    return rows


def _simulate(a: Seq | None, cfg: SdeConfig, n_paths: int, *,
              antithetic: bool = False, grid: OccupationGrid | None = None,
              chunk_size: int = 4096):
    """Vectorized path engine.

    Returns (component_sums, absorbed, lifetimes, end_xy, occupation) where
    component_sums has one row per support site of ``a`` (so the functional
    is linear in the coefficients by construction), and occupation is the
    per-path time spent in each grid cell (or None).
    """
    if n_paths < 1:
        raise ValueError("n_paths >= 1 required")
    if antithetic and n_paths % 2:
        raise ValueError("antithetic runs need an even path count")

    if a is not None:
        at = a.trimmed()
        ms = np.arange(at.support[0], at.support[1] + 1) if not at.is_zero() \
            else np.zeros(0, dtype=int)
        n_support = len(ms)
    else:
        ms = np.zeros(0, dtype=int)
        n_support = 0

    target = _TWO_PI * cfg.n
    comp = np.zeros((n_support, n_paths))
    absorbed = np.zeros(n_paths, dtype=bool)
    lifetimes = np.zeros(n_paths)
    end_x = np.zeros(n_paths)
    end_y = np.zeros(n_paths)
    occ = np.zeros((n_paths, grid.cells)) if grid is not None else None
    if grid is not None:
        wx = (grid.x_max - grid.x_min) / grid.nx
        wy = (grid.y_max - grid.y_min) / grid.ny

    step_groups = n_paths // 2 if antithetic else n_paths
    group = 2 if antithetic else 1
    per_chunk = chunk_size // group

    chunk_idx = 0
    done_groups = 0
    while done_groups < step_groups:
        g = min(per_chunk, step_groups - done_groups)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=cfg.seed, spawn_key=(chunk_idx,)))
        base = done_groups * group

        m = g * group
        idx = np.arange(m)                      # original in-chunk slot
        x = np.full(m, cfg.start[0])
        y = np.full(m, cfg.start[1])
        t = np.zeros(m)
        acc = np.zeros((n_support, m))
        dtk_prev = np.zeros(m)

        while len(x) > 0:
            dtk = np.clip(cfg.step_scale * y * y, cfg.dt, cfg.dt_cap)
            bx, by = drift_field(cfg, x, y)
            glx, gly = _grad_log_h(x, y)
            if n_support:
                # trapezoidal time rule: each state's integrand carries half
                # of the two adjacent step lengths, which centres the rule
                # and removes the leading step-size error of the integral
                rows = _functional_rows(x, y, glx, gly, bx - glx, by - gly, ms)
                acc += rows * (0.5 * (dtk_prev + dtk))
            # bound the drift displacement by twice the noise scale: far from
            # the boundary pole this is the identity (no taming bias), near
            # the pole it keeps single steps finite like standard taming
            mag = np.hypot(bx, by)
            tame = dtk / np.maximum(1.0, mag * np.sqrt(dtk) / 2.0)
            if antithetic:
                half = len(x) // 2
                xi = rng.standard_normal((half, 2))
                noise_x = np.concatenate([xi[:, 0], -xi[:, 0]])
                noise_y = np.concatenate([xi[:, 1], xi[:, 1]])
            else:
                xi = rng.standard_normal((len(x), 2))
                noise_x, noise_y = xi[:, 0], xi[:, 1]
            root = np.sqrt(dtk)
            x_new = x + bx * tame + root * noise_x
            y_new = y + by * tame + root * noise_y
            if occ is not None:
                # midpoint attribution of the step's time (left-point binning
                # systematically shifts occupation opposite to the motion)
                mx = 0.5 * (x + x_new)
                my = 0.5 * (y + y_new)
                ix = np.floor((mx - grid.x_min) / wx).astype(np.int64)
                iy = np.floor((my - grid.y_min) / wy).astype(np.int64)
                inside = (ix >= 0) & (ix < grid.nx) & (iy >= 0) & (iy < grid.ny)
                if inside.any():
                    flat = iy[inside] * grid.nx + ix[inside]
                    np.add.at(occ, (base + idx[inside], flat), dtk[inside])
            x = x_new
            y = y_new
            t = t + dtk

            hit = y < cfg.kill_eps
            near = np.abs(x - target) < cfg.match_radius
            absorb_now = hit & near
            reflect = (y <= 0.0) & ~absorb_now
            if reflect.any():
                y[reflect] = np.maximum(np.abs(y[reflect]), 1e-12)
            timeout = t >= cfg.max_time
            done = absorb_now | timeout
            if antithetic:
                # keep pairs in lockstep: a pair retires only when both are done
                half = len(x) // 2
                pair_done = done[:half] & done[half:]
                done = np.concatenate([pair_done, pair_done])
            if done.any():
                sel = idx[done]
                absorbed[base + sel] = absorb_now[done]
                lifetimes[base + sel] = t[done]
                end_x[base + sel] = x[done]
                end_y[base + sel] = y[done]
                if n_support:
                    comp[:, base + sel] = acc[:, done]
                keep = ~done
                x, y, t, idx = x[keep], y[keep], t[keep], idx[keep]
                dtk = dtk[keep]
                if n_support:
                    acc = acc[:, keep]
            dtk_prev = dtk

        done_groups += g
        chunk_idx += 1

    return comp, ms, absorbed, lifetimes, (end_x, end_y), occ


def simulate_path(a: Seq, cfg: SdeConfig) -> PathSample:
    """One path: the functional sample plus absorption bookkeeping.

    A timed-out path reports absorbed=False; its functional integral is
    truncated at max_time rather than silently dropped.
    """
    comp, ms, absorbed, lifetimes, (ex, ey), _ = _simulate(a, cfg, 1)
    coef = np.array([a[int(m)] for m in ms])
    value = float(coef @ comp[:, 0]) if len(ms) else 0.0
    return PathSample(value=value, absorbed=bool(absorbed[0]),
                      lifetime=float(lifetimes[0]),
                      end=(float(ex[0]), float(ey[0])))


def estimate_T(a: Seq, cfg: SdeConfig, paths: int,
               antithetic: bool = False) -> PathStats:
    """Monte Carlo mean and standard error of the conditioned functional.

    For starts high above the target this estimates the J-convolution of
    ``a`` at the target site; the estimator is exactly linear in ``a`` (the
    per-site time integrals are accumulated separately and combined at the
    end), so scaling ``a`` scales the estimate with no extra rounding.
    """
    comp, ms, absorbed, _, _, _ = _simulate(a, cfg, paths, antithetic=antithetic)
    coef = np.array([a[int(m)] for m in ms])
    samples = coef @ comp if len(ms) else np.zeros(paths)
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(paths)) if paths > 1 else 0.0
    return PathStats(mean=mean, std_error=se, paths=paths,
                     killed_fraction=float(np.mean(absorbed)))


def expected_occupation(cfg: SdeConfig, grid: OccupationGrid) -> np.ndarray:
    """Cell integrals of p_n(x, y) G(x, y) / p_n(start) by tensor quadrature."""
    x0, y0 = cfg.start
    pn0 = poisson_p(cfg.n, PlanePoint(x0, y0))
    out = np.empty((grid.ny, grid.nx))
    xs = np.linspace(grid.x_min, grid.x_max, grid.nx + 1)
    ys = np.linspace(grid.y_min, grid.y_max, grid.ny + 1)
    for j in range(grid.ny):
        for i in range(grid.nx):
            def inner(yv):
                yv = np.atleast_1d(yv)
                vals = np.empty_like(yv)
                for kk, yy in enumerate(yv):
                    def fx(xv):
                        xv = np.asarray(xv, dtype=float)
                        xt = xv - _TWO_PI * cfg.n
                        pn = yy / (math.pi * (xt * xt + yy * yy))
                        dx2 = (xv - x0) ** 2
                        G = np.log((dx2 + (yy + y0) ** 2)
                                   / (dx2 + (yy - y0) ** 2)) / _TWO_PI
                        return pn * G / pn0
                    lo = np.array([xs[i], 0.5 * (xs[i] + xs[i + 1])])
                    hi = np.array([0.5 * (xs[i] + xs[i + 1]), xs[i + 1]])
                    v, _ = _gk_eval(fx, lo, hi)
                    vals[kk] = v.sum()
                return vals
            lo = np.array([ys[j], 0.5 * (ys[j] + ys[j + 1])])
            hi = np.array([0.5 * (ys[j] + ys[j + 1]), ys[j + 1]])
            v, _ = _gk_eval(inner, lo, hi)
            out[j, i] = v.sum()
    return out


def occupation_check(cfg: SdeConfig, grid: OccupationGrid,
                     paths: int) -> OccupationReport:
    """Binned mean occupation times against the closed-form density.

    Per-cell z-scores use the path-to-path standard error; the chi-square
    style aggregate compares sum(z^2) with its cell-count expectation.
    """
    _, _, _, _, _, occ = _simulate(None, cfg, paths, grid=grid)
    obs = occ.mean(axis=0).reshape(grid.ny, grid.nx)
    se = (occ.std(axis=0, ddof=1) / math.sqrt(paths)).reshape(grid.ny, grid.nx)
    exp = expected_occupation(cfg, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (obs - exp) / se, np.where(np.abs(exp) < 1e-12, 0.0, np.inf))
    cells = grid.cells
    chi2 = float(np.sum(z * z))
    chi2_z = (chi2 - cells) / math.sqrt(2.0 * cells)
    total_se = float(np.std(occ.sum(axis=1), ddof=1) / math.sqrt(paths))
    total_z = (float(occ.sum(axis=1).mean()) - float(exp.sum())) / total_se \
        if total_se > 0 else math.inf
    return OccupationReport(
        observed=obs, expected=exp, std_error=se, z=z, paths=paths,
        max_abs_z=float(np.max(np.abs(z))),
        frac_within_3=float(np.mean(np.abs(z) <= 3.0)),
        chi2=chi2, chi2_z=float(chi2_z), total_z=float(total_z))


def refine_dt(cfg: SdeConfig, factor: float = 0.5) -> SdeConfig:
    """Halve (by default) every step-size control; used for bias probes."""
    return replace(cfg, dt=cfg.dt * factor, step_scale=cfg.step_scale * factor)
