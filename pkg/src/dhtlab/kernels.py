"""Closed-form evaluation of all the convolution kernels used in the project.

Five transform kernels (classic, half-shifted, odd-only, symmetrised, and the
conditional-expectation kernel J) plus the auxiliary kernels F and E that tie
J back to the classic one.  J, F and E are quadrature-backed; everything else
is a rational closed form.

Quadrature-backed kernels are evaluated on a fixed composite Gauss-Kronrod
grid shared by the whole window, with per-entry error estimates.  Batch
(window) evaluation and pointwise evaluation run through the identical code
path, so cached entries reproduce bit-exactly.
"""

from __future__ import annotations

import math
import threading

import numpy as np
from scipy.special import shichi

from dhtlab.numerics import csch_cu, csch_sq

__all__ = [
    "Kernel",
    "HILBERT", "RT", "KAK", "ADP", "J", "F", "E",
    "KERNELS",
    "hilbert_kernel", "rt_kernel", "kak_kernel", "adp_kernel",
    "j_kernel", "f_kernel", "e_kernel",
    "sinh_minus_shi", "e_tail_constant",
]

_PI = math.pi

# Integration range for the exponentially decaying integrands; beyond Y_MAX
# they are below 1e-35 of the total.
_Y_MAX = 45.0
_PANEL_WIDTH = 0.5

_K15_NODES = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_K15_W = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
# Gauss-7 weights spread onto the 15 Kronrod slots (zeros off the Gauss nodes).
_G7_W15 = np.zeros(15)
_G7_W15[1::2] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]

_CHUNK = 256


def sinh_minus_shi(y):
    """sinh(y) - integral_0^y sinh(t)/t dt, stable for all y >= 0.

    Below y = 1 the direct difference cancels catastrophically, so a power
    series is used; the terms are 2k y^(2k+1) / ((2k+1) (2k+1)!).  Above
    y = 350 the quantity under its 2y/sinh^3 envelope is below 1e-290 and is
    treated as zero by callers.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty_like(y)
    small = y < 1.0
    ys = y[small]
    acc = np.zeros_like(ys)
    term = ys.copy()
    for k in range(1, 12):
        term = term * ys * ys / ((2 * k) * (2 * k + 1))
        acc += term * (2 * k) / (2 * k + 1)
    out[small] = acc
    yl = np.clip(y[~small], None, 700.0)
    shi, _ = shichi(yl)
    out[~small] = np.sinh(yl) - shi
    return out


class _ExpGrid:
    """Fixed composite G7/K15 grid on (0, Y_MAX] with cumulative inner rule.

    Outer nodes carry the exponentially decaying envelopes; the inner rule
    integrates t sinh(t)/(t^2 + pi^2 n^2) cumulatively between consecutive
    outer nodes, which gives the inner antiderivative at every outer node in
    one vectorized pass per n.
    """

    def __init__(self):
        n_panels = int(round(_Y_MAX / _PANEL_WIDTH))
        edges = np.linspace(0.0, _Y_MAX, n_panels + 1)
        lo, hi = edges[:-1], edges[1:]
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        self.n_panels = n_panels
        self.y = (mid[:, None] + half[:, None] * _K15_NODES[None, :]).ravel()
        self.wk = (half[:, None] * _K15_W[None, :]).ravel()
        self.wg = (half[:, None] * _G7_W15[None, :]).ravel()

        # inner segments between consecutive outer nodes (first starts at 0)
        seg_lo = np.concatenate([[0.0], self.y[:-1]])
        seg_hi = self.y
        smid = 0.5 * (seg_lo + seg_hi)
        shalf = 0.5 * (seg_hi - seg_lo)
        t = smid[:, None] + shalf[:, None] * _K15_NODES[None, :]
        self.t_flat = t.ravel()
        self.inner_wk = (shalf[:, None] * _K15_W[None, :]).ravel()
        self.inner_wg = (shalf[:, None] * _G7_W15[None, :]).ravel()
        self.t_sinh_t = self.t_flat * np.sinh(self.t_flat)

        # envelopes at the outer nodes
        self.env_j = 2.0 * self.y ** 3 * csch_sq(self.y)       # for J and F
        self.env_e = 2.0 * self.y * csch_cu(self.y)            # for E
        self.bracket0 = sinh_minus_shi(self.y)                 # for E at n = 0

        self.n_nodes = len(self.y)

    def _outer_sums(self, integrand_rows: np.ndarray):
        """K15 value, and summed |K15 - G7| panel discrepancies, per row."""
        vk = integrand_rows @ self.wk
        panels = integrand_rows.reshape(len(integrand_rows), self.n_panels, 15)
        pk = panels @ _K15_W[:, None] * (_PANEL_WIDTH / 2.0)
        pg = panels @ _G7_W15[:, None] * (_PANEL_WIDTH / 2.0)
        err = np.abs(pk - pg).sum(axis=1).ravel()
        return vk, err

    def j_integral(self, ns: np.ndarray):
        """integral_0^inf 2 y^3 / ((y^2 + pi^2 n^2) sinh^2 y) dy for each |n| >= 1."""
        a2 = (_PI * ns.astype(float)) ** 2
        rows = self.env_j[None, :] / (self.y[None, :] ** 2 + a2[:, None])
        vk, err = self._outer_sums(rows)
        return vk, err + 1e-30

    def e_values(self, ns: np.ndarray):
        """E_n for each n >= 1 (even in n), with error estimates."""
        a2 = (_PI * ns.astype(float)) ** 2
        base = self.t_sinh_t[None, :] / (self.t_flat[None, :] ** 2 + a2[:, None])
        inc_k = (base * self.inner_wk).reshape(len(ns), self.n_nodes, 15).sum(axis=2)
        inc_g = (base * self.inner_wg).reshape(len(ns), self.n_nodes, 15).sum(axis=2)
        inner = np.cumsum(inc_k, axis=1)
        inner_err = np.cumsum(np.abs(inc_k - inc_g), axis=1)
        rows = self.env_e[None, :] * inner
        vk, err = self._outer_sums(rows)
        err_inner = (np.abs(self.env_e * self.wk)[None, :] * inner_err).sum(axis=1)
        return -vk, err + err_inner

    def e_zero(self):
        rows = (self.env_e * self.bracket0)[None, :]
        vk, err = self._outer_sums(rows)
        return vk[0], err[0]


_GRID: _ExpGrid | None = None
_GRID_LOCK = threading.Lock()


def _grid() -> _ExpGrid:
    global _GRID
    if _GRID is None:
        with _GRID_LOCK:
            if _GRID is None:
                _GRID = _ExpGrid()
    return _GRID


class Kernel:
    """A doubly-infinite kernel given by a closed-form (possibly quadrature
    backed) generator, with parity and tail-decay metadata and a cached window.

    The cache fill is idempotent (each entry recomputes to the same bits), so
    concurrent readers are safe.
    """

    def __init__(self, name: str, batch_fn, parity: str, tail_exponent: float,
                 cache_radius: int = 4096):
        if parity not in ("odd", "even", "none"):
            raise ValueError(f"bad parity {parity!r}")
        self.name = name
        self.parity = parity
        self.tail_exponent = tail_exponent
        self.cache_radius = cache_radius
        self._batch_fn = batch_fn
        self._vals = None
        self._errs = None
        self._lock = threading.Lock()

    # -- evaluation ----------------------------------------------------------

    def _compute(self, ns: np.ndarray):
        vals, errs = self._batch_fn(np.asarray(ns, dtype=np.int64))
        return np.asarray(vals, dtype=float), np.asarray(errs, dtype=float)

    def _ensure_cache(self):
        if self._vals is None:
            with self._lock:
                if self._vals is None:
                    size = 2 * self.cache_radius + 1
                    self._errs = np.full(size, np.nan)
                    vals = np.full(size, np.nan)
                    self._vals = vals

    def _fill(self, lo: int, hi: int):
        """Fill cache entries for n in [lo, hi] (clipped to the cache)."""
        self._ensure_cache()
        lo = max(lo, -self.cache_radius)
        hi = min(hi, self.cache_radius)
        if lo > hi:
            return
        idx = np.arange(lo, hi + 1) + self.cache_radius
        missing = np.isnan(self._vals[idx])
        if missing.any():
            ns = np.arange(lo, hi + 1)[missing]
            vals, errs = self._compute(ns)
            self._vals[idx[missing]] = vals
            self._errs[idx[missing]] = errs

    def value(self, n: int) -> float:
        n = int(n)
        if abs(n) <= self.cache_radius:
            self._fill(n, n)
            return float(self._vals[n + self.cache_radius])
        vals, _ = self._compute(np.array([n]))
        return float(vals[0])

    __call__ = value

    @property
    def generator(self):
        return self.value

    def window_range(self, lo: int, hi: int):
        """Values for n = lo..hi inclusive, as a dense array."""
        lo, hi = int(lo), int(hi)
        if lo > hi:
            raise ValueError("empty window")
        if -self.cache_radius <= lo and hi <= self.cache_radius:
            self._fill(lo, hi)
            return self._vals[lo + self.cache_radius: hi + 1 + self.cache_radius].copy()
        vals, _ = self._compute(np.arange(lo, hi + 1))
        return vals

    def window(self, radius: int):
        """Values for n = -radius..radius."""
        return self.window_range(-radius, radius)

    def error_window(self, radius: int):
        """Per-entry quadrature error estimates for n = -radius..radius."""
        radius = int(radius)
        if radius <= self.cache_radius:
            self._fill(-radius, radius)
            c = self.cache_radius
            return self._errs[c - radius: c + radius + 1].copy()
        _, errs = self._compute(np.arange(-radius, radius + 1))
        return errs

    def __repr__(self):
        return f"Kernel({self.name!r}, parity={self.parity}, tail={self.tail_exponent})"


# -- closed-form batch generators ---------------------------------------------

def _eps_err(vals):
    return 4.0 * np.finfo(float).eps * np.abs(vals)


def _hilbert_batch(ns):
    vals = np.zeros(len(ns))
    nz = ns != 0
    vals[nz] = 1.0 / (_PI * ns[nz])
    return vals, _eps_err(vals)


def _rt_batch(ns):
    vals = 1.0 / (_PI * (ns + 0.5))
    return vals, _eps_err(vals)


def _kak_batch(ns):
    vals = np.zeros(len(ns))
    odd = (ns % 2) != 0
    vals[odd] = 2.0 / (_PI * ns[odd])
    return vals, _eps_err(vals)


def _adp_batch(ns):
    vals = ns / (_PI * (ns.astype(float) ** 2 - 0.25))
    return vals, _eps_err(vals)


def _j_f_batch(ns, with_hilbert_part):
    ns = np.asarray(ns, dtype=np.int64)
    vals = np.zeros(len(ns))
    errs = np.zeros(len(ns))
    nz = np.nonzero(ns)[0]
    g = _grid()
    for s in range(0, len(nz), _CHUNK):
        sel = nz[s:s + _CHUNK]
        integral, ierr = g.j_integral(np.abs(ns[sel]))
        if with_hilbert_part:
            integral = integral + 1.0
        vals[sel] = integral / (_PI * ns[sel])
        errs[sel] = ierr / (_PI * np.abs(ns[sel])) + _eps_err(vals[sel])
    return vals, errs


def _j_batch(ns):
    return _j_f_batch(ns, with_hilbert_part=True)


def _f_batch(ns):
    return _j_f_batch(ns, with_hilbert_part=False)


def _e_batch(ns):
    ns = np.asarray(ns, dtype=np.int64)
    vals = np.zeros(len(ns))
    errs = np.zeros(len(ns))
    g = _grid()
    zero = ns == 0
    if zero.any():
        v0, e0 = g.e_zero()
        vals[zero] = v0
        errs[zero] = e0
    nz = np.nonzero(ns)[0]
    for s in range(0, len(nz), _CHUNK):
        sel = nz[s:s + _CHUNK]
        v, e = g.e_values(np.abs(ns[sel]))
        vals[sel] = v
        errs[sel] = e + _eps_err(v)
    return vals, errs


HILBERT = Kernel("H", _hilbert_batch, parity="odd", tail_exponent=1.0)
RT = Kernel("RT", _rt_batch, parity="none", tail_exponent=1.0)
KAK = Kernel("K", _kak_batch, parity="odd", tail_exponent=1.0)
ADP = Kernel("ADP", _adp_batch, parity="odd", tail_exponent=1.0)
J = Kernel("J", _j_batch, parity="odd", tail_exponent=1.0)
F = Kernel("F", _f_batch, parity="odd", tail_exponent=3.0)
E = Kernel("E", _e_batch, parity="even", tail_exponent=2.0)

KERNELS = {k.name: k for k in (HILBERT, RT, KAK, ADP, J, F, E)}


def hilbert_kernel(n: int) -> float:
    """1/(pi n) for n != 0, zero at n = 0."""
    return HILBERT.value(n)


def rt_kernel(n: int) -> float:
    """1/(pi (n + 1/2)); antisymmetric about -1/2 rather than 0."""
    return RT.value(n)


def kak_kernel(n: int) -> float:
    """2/(pi n) on odd n, zero on even n."""
    return KAK.value(n)


def adp_kernel(n: int) -> float:
    """n / (pi (n^2 - 1/4)), the average of the two half-shifted kernels."""
    return ADP.value(n)


def j_kernel(n: int) -> float:
    """(1/(pi n)) (1 + integral_0^inf 2 y^3 / ((y^2 + pi^2 n^2) sinh^2 y) dy).

    Zero at n = 0; strictly dominates 1/(pi n) for n > 0.
    """
    return J.value(n)


def f_kernel(n: int) -> float:
    """(1/(pi n)) integral_0^inf 2 y^3 / ((y^2 + pi^2 n^2) sinh^2 y) dy; zero at 0.

    Satisfies j_kernel(n) = hilbert_kernel(n) + f_kernel(n) by construction
    (the two share the same quadrature).
    """
    return F.value(n)


def e_kernel(n: int) -> float:
    """Even absolutely-summable kernel with positive mass at 0 and negative
    mass elsewhere, summing to zero; the discrete Hilbert transform maps it
    to the F kernel.

    E_0 integrates 2y/sinh^3(y) (sinh y - int_0^y sinh(t)/t dt); E_n for
    n != 0 integrates -2y/sinh^3(y) int_0^y t sinh t/(t^2 + pi^2 n^2) dt.
    The inner integrals are accumulated once per n on the shared grid rather
    than by naive nesting.
    """
    return E.value(n)


_E_TAIL = None


def e_tail_constant() -> float:
    """Constant c with |E_n| <= c / n^2, used for windowed tail budgets.

    c = (1/pi^2) * integral_0^inf 2 y (y cosh y - sinh y) / sinh^3 y dy,
    from the monotone bound on the inner integrand.
    """
    global _E_TAIL
    if _E_TAIL is None:
        g = _grid()
        # y cosh y - sinh y with a series below y = 1 (cancellation there)
        y = g.y
        bracket = np.empty_like(y)
        small = y < 1.0
        ys = y[small]
        acc = np.zeros_like(ys)
        term = ys.copy()
        for k in range(1, 12):
            term = term * ys * ys / ((2 * k) * (2 * k + 1))
            acc += term * (2 * k)
        bracket[small] = acc
        yl = y[~small]
        bracket[~small] = yl * np.cosh(yl) - np.sinh(yl)
        rows = (g.env_e * bracket)[None, :]
        vk, _ = g._outer_sums(rows)
        _E_TAIL = float(vk[0]) / _PI ** 2
    return _E_TAIL
