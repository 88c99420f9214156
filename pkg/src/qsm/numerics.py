"""Shared numerical primitives with explicit tolerance contracts.

Three tools used throughout the package:

* :func:`integrate` -- adaptive Gauss-Kronrod (G7/K15) panel subdivision on a
  finite interval.  The returned error estimate is the sum of per-panel
  ``|K15 - G7|`` differences, which is conservative for smooth integrands.
* :func:`find_min_convex` -- minimizer for strictly convex scalar functions by
  bisection on the sign of the derivative (central difference unless an
  analytic derivative is supplied), with a golden-section fallback if the
  derivative estimate degenerates.
* :class:`RandomStream` -- counter-based (Philox) random streams.  Equal
  ``(seed, stream_id)`` always reproduces bitwise-equal draws, and batch
  substreams are independent of execution order and thread count.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .exceptions import BracketError, DomainError, NonConvergence

__all__ = [
    "QuadratureSpec",
    "RootSpec",
    "RandomStream",
    "ConvexMinResult",
    "integrate",
    "find_min_convex",
    "golden_section_min",
    "gauss_legendre_rule",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance contract for adaptive quadrature."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2048

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 8:
            raise ValueError("max_subdivisions must be >= 8")


@dataclass(frozen=True)
class RootSpec:
    """Tolerance contract for bracketed root finding / minimization.

    ``x_tol`` is applied relative to ``max(1, |x|)`` so that minimizers far
    from the origin terminate sensibly.
    """

    x_tol: float = 1e-13
    f_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not (self.x_tol > 0 and self.f_tol > 0 and self.max_iter > 0):
            raise ValueError("all tolerances must be positive")


@dataclass(frozen=True)
class RandomStream:
    """A named, reproducible random stream.

    Streams are value types: draws come from fresh ``numpy`` Philox
    generators keyed by ``(seed, stream_id)``, so a stream can be shared
    freely and two runs with equal identifiers produce bitwise-equal
    sequences.  ``substream(i)`` offsets the 256-bit Philox counter by
    ``i * 2**128``, giving non-overlapping batch streams whose output does
    not depend on scheduling order.
    """

    seed: int
    stream_id: int = 0

    def _key(self) -> np.ndarray:
        mask = (1 << 64) - 1
        return np.array([self.seed & mask, self.stream_id & mask], dtype=np.uint64)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self._key()))

    def substream(self, index: int) -> np.random.Generator:
        counter = np.array([0, 0, index & ((1 << 64) - 1), 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self._key(), counter=counter))


# Kronrod-15 nodes on [-1, 1] (positive half) and weights; the embedded
# Gauss-7 rule uses the odd-indexed nodes.  Standard QUADPACK constants.
_XGK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
_WEIGHTS_K = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
_WEIGHTS_G = np.zeros_like(_WEIGHTS_K)
_WEIGHTS_G[1:-1:2] = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


def _panel(f, a: float, b: float) -> tuple[float, float]:
    """One G7/K15 evaluation on [a, b] -> (K15 value, |K15-G7| estimate)."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = np.asarray(f(mid + half * _NODES), dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError(f"integrand not finite on [{a!r}, {b!r}]")
    k15 = half * float(y @ _WEIGHTS_K)
    g7 = half * float(y @ _WEIGHTS_G)
    return k15, abs(k15 - g7)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` to the tolerances in ``spec``.

    ``f`` must accept an ndarray of abscissae and return the integrand values
    elementwise.  Returns ``(value, err_est)``; raises
    :class:`~qsm.exceptions.NonConvergence` if the subdivision budget is
    exhausted first.
    """
    spec = spec or QuadratureSpec()
    if not a < b:
        raise DomainError(f"need a < b, got [{a!r}, {b!r}]")
    value, err = _panel(f, a, b)
    # heap of (-panel_err, a, b, panel_value, panel_err)
    heap = [(-err, a, b, value, err)]
    total = value
    total_err = err
    for _ in range(spec.max_subdivisions):
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return total, total_err
        neg_err, pa, pb, pval, perr = heapq.heappop(heap)
        pm = 0.5 * (pa + pb)
        if pm <= pa or pm >= pb:  # panel at machine resolution; keep as is
            heapq.heappush(heap, (0.0, pa, pb, pval, perr))
            continue
        lval, lerr = _panel(f, pa, pm)
        rval, rerr = _panel(f, pm, pb)
        total += lval + rval - pval
        total_err += lerr + rerr - perr
        heapq.heappush(heap, (-lerr, pa, pm, lval, lerr))
        heapq.heappush(heap, (-rerr, pm, pb, rval, rerr))
    if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
        return total, total_err
    raise NonConvergence(
        f"quadrature on [{a!r}, {b!r}]: err_est {total_err:.3e} above tolerance "
        f"after {spec.max_subdivisions} subdivisions"
    )


@dataclass(frozen=True)
class ConvexMinResult:
    x_min: float
    g_min: float
    iterations: int


def _central_diff(g, x: float) -> float:
    h = 6.0e-6 * max(1.0, abs(x))
    return (g(x + h) - g(x - h)) / (2.0 * h)


def find_min_convex(
    g: Callable[[float], float],
    bracket: tuple[float, float],
    spec: RootSpec | None = None,
    derivative: Callable[[float], float] | None = None,
) -> ConvexMinResult:
    """Minimize a strictly convex scalar function inside ``bracket``.

    Bisects on the sign of ``g'`` (central difference unless ``derivative``
    is given).  The minimizer must lie strictly inside the bracket, i.e.
    ``g'`` changes sign across it; otherwise :class:`BracketError` is raised.
    Falls back to golden-section search if the derivative estimate turns
    non-finite (e.g. from cancellation in the caller's function).
    """
    spec = spec or RootSpec()
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f"invalid bracket ({lo!r}, {hi!r})")
    dg = derivative if derivative is not None else (lambda x: _central_diff(g, x))
    d_lo, d_hi = dg(lo), dg(hi)
    if math.isnan(d_lo) or math.isnan(d_hi):
        return golden_section_min(g, lo, hi, spec)
    if not (d_lo < 0.0 < d_hi):
        raise BracketError(
            f"derivative does not change sign on bracket: g'({lo:g})={d_lo:.3e}, "
            f"g'({hi:g})={d_hi:.3e}"
        )
    for it in range(1, spec.max_iter + 1):
        x = 0.5 * (lo + hi)
        d = dg(x)
        if math.isnan(d):
            return golden_section_min(g, lo, hi, spec)
        if abs(d) <= spec.f_tol or (hi - lo) <= spec.x_tol * max(1.0, abs(x)):
            return ConvexMinResult(x, g(x), it)
        if d > 0.0:
            hi = x
        else:
            lo = x
    raise NonConvergence(f"minimizer did not converge in {spec.max_iter} iterations")


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(g, lo: float, hi: float, spec: RootSpec | None = None) -> ConvexMinResult:
    """Derivative-free golden-section minimization on [lo, hi]."""
    spec = spec or RootSpec()
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = g(c), g(d)
    for it in range(1, spec.max_iter + 1):
        if (b - a) <= spec.x_tol * max(1.0, abs(c) + abs(d)):
            break
        if gc < gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = g(d)
    x = 0.5 * (a + b)
    return ConvexMinResult(x, g(x), it)


@lru_cache(maxsize=32)
def gauss_legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes/weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)
