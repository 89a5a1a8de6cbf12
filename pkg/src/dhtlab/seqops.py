"""Finitely supported doubly-infinite sequences and convolution against kernels.

Sequences have value semantics (frozen dataclass over a read-only array) and
may be shared freely between threads.  Convolution has a direct path with a
fixed summation order for bit-reproducibility and an FFT path for large
supports; the two agree to ~1e-12 relative.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from dhtlab.kernels import Kernel
from dhtlab.numerics import Exponent

__all__ = [
    "Seq",
    "ConvOperator",
    "lp_norm",
    "convolve",
    "adjoint_kernel",
    "scale_kernel",
    "seq_to_csv",
    "seq_from_csv",
    "seq_to_json",
    "seq_from_json",
]

_FFT_THRESHOLD = 512


@dataclass(frozen=True)
class Seq:
    """A finitely supported sequence: dense values starting at ``offset``."""

    offset: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "offset", int(self.offset))

    @staticmethod
    def delta(n: int = 0, weight: float = 1.0) -> "Seq":
        return Seq(n, np.array([weight]))

    @staticmethod
    def from_dict(entries: dict[int, float]) -> "Seq":
        if not entries:
            return Seq(0, np.zeros(0))
        lo, hi = min(entries), max(entries)
        vals = np.zeros(hi - lo + 1)
        for n, v in entries.items():
            vals[n - lo] = v
        return Seq(lo, vals)

    @property
    def support(self) -> tuple[int, int]:
        """(first, last) index of the stored block; meaningful after trimming."""
        return self.offset, self.offset + len(self.values) - 1

    def trimmed(self) -> "Seq":
        """Drop leading/trailing zeros; semantic identity is unchanged."""
        nz = np.nonzero(self.values)[0]
        if len(nz) == 0:
            return Seq(0, np.zeros(0))
        return Seq(self.offset + int(nz[0]), self.values[nz[0]:nz[-1] + 1])

    def __getitem__(self, n: int) -> float:
        i = n - self.offset
        if 0 <= i < len(self.values):
            return float(self.values[i])
        return 0.0

    def to_dense(self, lo: int, hi: int) -> np.ndarray:
        """Values on [lo, hi] as a dense array (zeros outside the support)."""
        out = np.zeros(hi - lo + 1)
        a = max(lo, self.offset)
        b = min(hi, self.offset + len(self.values) - 1)
        if a <= b:
            out[a - lo: b - lo + 1] = self.values[a - self.offset: b - self.offset + 1]
        return out

    def shift(self, s: int) -> "Seq":
        return Seq(self.offset + s, self.values)

    def restrict(self, radius: int) -> "Seq":
        """P_N: zero out entries with |n| > radius."""
        return Seq(-radius, self.to_dense(-radius, radius))

    def scale(self, c: float) -> "Seq":
        return Seq(self.offset, self.values * c)

    def is_zero(self) -> bool:
        return not np.any(self.values)


def lp_norm(a: Seq, p) -> float:
    """The l^p norm of a finitely supported sequence; p may be an Exponent,
    a real in [1, inf), or math.inf."""
    if isinstance(p, Exponent):
        p = p.p
    v = np.abs(a.values)
    if len(v) == 0:
        return 0.0
    if p == math.inf:
        return float(v.max())
    if p == 1:
        return float(v.sum())
    if p <= 0:
        raise ValueError("p must be positive")
    if p == 2:
        return float(np.sqrt(np.dot(v, v)))
    return float((v ** p).sum() ** (1.0 / p))


def _convolve_dense_direct(a: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Full convolution, summing over the entries of ``a`` in ascending index
    order (fixed order => bit-reproducible)."""
    out = np.zeros(len(a) + len(k) - 1)
    for j in range(len(a)):
        aj = a[j]
        if aj != 0.0:
            out[j: j + len(k)] += aj * k
    return out


def _convolve_dense(a: np.ndarray, k: np.ndarray) -> np.ndarray:
    if min(len(a), len(k)) == 0:
        return np.zeros(max(len(a) + len(k) - 1, 0))
    if len(a) > _FFT_THRESHOLD:
        return fftconvolve(a, k)
    return _convolve_dense_direct(a, k)


def convolve(k: Kernel, a: Seq, out_radius: int) -> Seq:
    """(k * a)_n for n in [-out_radius, out_radius]; exact up to rounding.

    Kernel entries are read only on the index range actually touched by the
    support of ``a``, so truncated operators never see entries beyond
    |m| <= 2N for inputs inside [-N, N].
    """
    if out_radius < 1:
        raise ValueError("out_radius must be >= 1")
    at = a.trimmed()
    if at.is_zero():
        return Seq(-out_radius, np.zeros(2 * out_radius + 1))
    a_lo, a_hi = at.support
    kw = k.window_range(-out_radius - a_hi, out_radius - a_lo)
    full = _convolve_dense(at.values, kw)
    # full[t] corresponds to output index n = t + a_lo + (-out_radius - a_hi)
    start = a_lo - out_radius - a_hi
    i0 = -out_radius - start
    return Seq(-out_radius, full[i0: i0 + 2 * out_radius + 1])


def adjoint_kernel(k: Kernel) -> Kernel:
    """Kernel of the transposed operator: n -> k(-n)."""
    def batch(ns):
        return k._batch_fn(-np.asarray(ns))
    return Kernel(k.name + "^T", batch, parity=k.parity,
                  tail_exponent=k.tail_exponent, cache_radius=k.cache_radius)


def scale_kernel(k: Kernel, c: float) -> Kernel:
    """Kernel pointwise scaled by the constant c."""
    def batch(ns):
        vals, errs = k._batch_fn(np.asarray(ns))
        return c * vals, abs(c) * errs
    return Kernel(f"{c}*{k.name}", batch, parity=k.parity,
                  tail_exponent=k.tail_exponent, cache_radius=k.cache_radius)


@dataclass
class ConvOperator:
    """The truncation P_N T P_N of a convolution operator T to [-N, N].

    P_N is an l^p contraction, so norms of truncations are certified lower
    bounds for the full operator norm and are monotone in N.  The kernel
    window [-2N, 2N] is materialized once per operator.
    """

    kernel: Kernel
    window_radius: int
    _kw: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.window_radius < 1:
            raise ValueError("window_radius must be >= 1")

    def _window(self) -> np.ndarray:
        if self._kw is None:
            n = self.window_radius
            self._kw = self.kernel.window_range(-2 * n, 2 * n)
        return self._kw

    @property
    def size(self) -> int:
        return 2 * self.window_radius + 1

    def apply_dense(self, v: np.ndarray) -> np.ndarray:
        """T_N v for v given densely on [-N, N]; returns the same layout."""
        kw = self._window()
        full = _convolve_dense(v, kw)
        # full index t <-> output n = t - 3N
        n = self.window_radius
        return full[2 * n: 4 * n + 1]

    def apply_adjoint_dense(self, v: np.ndarray) -> np.ndarray:
        kw = self._window()[::-1]
        full = _convolve_dense(v, kw)
        n = self.window_radius
        return full[2 * n: 4 * n + 1]

    def apply(self, a: Seq) -> Seq:
        v = a.to_dense(-self.window_radius, self.window_radius)
        return Seq(-self.window_radius, self.apply_dense(v))

    def matrix(self) -> np.ndarray:
        """Dense (2N+1) x (2N+1) Toeplitz matrix M[i, j] = k(i - j)."""
        kw = self._window()
        n = self.window_radius
        idx = np.arange(-n, n + 1)
        return kw[(idx[:, None] - idx[None, :]) + 2 * n]


# -- sequence I/O --------------------------------------------------------------

def seq_to_csv(a: Seq) -> str:
    buf = io.StringIO()
    buf.write("n,value\n")
    for i, v in enumerate(a.values):
        buf.write(f"{a.offset + i},{float(v)!r}\n")
    return buf.getvalue()


def seq_from_csv(text: str) -> Seq:
    entries = {}
    lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("#")]
    if lines and lines[0].lower().startswith("n,"):
        lines = lines[1:]
    for ln in lines:
        n_str, v_str = ln.split(",")
        entries[int(n_str)] = float(v_str)
    return Seq.from_dict(entries)


def seq_to_json(a: Seq) -> str:
    return json.dumps({"offset": a.offset, "values": list(a.values)})


def seq_from_json(text: str) -> Seq:
    obj = json.loads(text)
    return Seq(obj["offset"], np.asarray(obj["values"], dtype=float))
