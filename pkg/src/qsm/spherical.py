"""Saddle-point solution of the mean-spherical quantum spin model.

The model replaces the hard per-site spin constraint by one global
constraint enforced with a Dirac delta (the Berlin-Kac construction).
After Gaussian integration the partition function on a periodic hypercubic
lattice of N = L^d sites collapses to a single contour integral

    Z_N ~ integral exp(N * F(w)) dw

over a variable ``w`` measuring the distance of the contour from the edge
of the coupling spectrum.  The steepest-descent exponent per site is

    F(w) = beta*J*(w+d) + (beta*H)^2/(4*beta*J*w)
         + (beta*B)^2/(4*beta*J*(w+d))
         - log(beta*J*(w+d)) - (1/2) * (log(beta*J) + S(w)),

where ``S(w)`` is the per-site log-determinant of the shifted coupling
matrix: a Brillouin-zone sum ``(1/N) sum log(w + d - sum_j cos omega_j)``
at finite N, or its lattice (Watson-type) integral in the thermodynamic
limit.  F is strictly convex on (0, inf), so the saddle ``w0`` is the
unique minimizer, and the free energy per site is

    f(beta) = -(3/(2*beta)) * log(pi) - F(w0)/beta

with the additive constant fixed by carrying every prefactor of the
constrained Gaussian integral (the finite-N contour oracle in
:mod:`qsm.oracles` reproduces exactly this normalization).

In the zero-temperature limit the log terms drop out and the ground-state
energy per site reduces to minimizing

    e(u) = J*u + H^2/(4*J*(u-d)) + B^2/(4*J*u),    u = w + d,

over u > d (u >= d when H = 0, the edge being admissible).  As H -> 0 the
minimizer either sits at u0 = B/2J > d (free saddle, e = B) or sticks at
the spectral edge u0 = d (pinned saddle, e = Jd + B^2/4Jd); the crossover
at B = 2Jd is the model's transverse-field critical point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .exceptions import DimensionCap, DomainError, NonConvergence
from .numerics import QuadratureSpec, RootSpec, find_min_convex, gauss_legendre_rule, integrate

__all__ = [
    "SphericalParams",
    "LatticeSpec",
    "SaddleSolution",
    "FreeEnergyResult",
    "spectrum_term_finite",
    "spectrum_term_limit",
    "saddle_exponent",
    "saddle_exponent_deriv",
    "solve_saddle",
    "ground_saddle",
    "ground_energy",
    "ground_energy_h_extrapolated",
    "free_energy_finite_beta",
    "susceptibility_at_zero_field",
]

_LOG2 = float(np.log(2.0))
_LOG_PI = float(np.log(np.pi))
_SITE_CAP = 1 << 24  # dense mode-table cap (~134 MB of float64)


@dataclass(frozen=True)
class SphericalParams:
    """Couplings of the constrained-spin model.

    ``J > 0`` for the physical model; ``J = 0`` is admitted because the
    decoupled case is the closed-form anchor used by the oracles.  ``H`` is
    the symmetry-breaking field whose ``H -> 0`` limit selects the phase.
    """

    J: float
    B: float
    H: float
    d: int
    beta: float

    def __post_init__(self):
        if not self.J >= 0:
            raise ValueError(f"J must be nonnegative, got {self.J!r}")
        if not self.B >= 0:
            raise ValueError(f"B must be nonnegative, got {self.B!r}")
        if not self.H >= 0:
            raise ValueError(f"H must be nonnegative, got {self.H!r}")
        if not (isinstance(self.d, int) and self.d >= 1):
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic hypercubic lattice: side L >= 3, dimension d, N = L^d sites."""

    d: int
    L: int

    def __post_init__(self):
        if not (isinstance(self.d, int) and self.d >= 1):
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        if not (isinstance(self.L, int) and self.L >= 3):
            raise ValueError(f"L must be an integer >= 3, got {self.L!r}")
        if self.L ** self.d > _SITE_CAP:
            raise DimensionCap(f"N = {self.L}^{self.d} exceeds the {_SITE_CAP} site cap")

    @property
    def N(self) -> int:
        return self.L ** self.d


@dataclass(frozen=True)
class SaddleSolution:
    w0: float
    phi_at_w0: float
    f_per_site: float
    iterations: int
    mode: str  # "finite_N" | "thermodynamic"
    edge_case: bool = False


@dataclass(frozen=True)
class FreeEnergyResult:
    value: float
    err_est: float
    method: str  # "quadrature" | "saddle" | "oracle"
    saddle: SaddleSolution | None = None


@lru_cache(maxsize=8)
def _mode_cos_sums(L: int, d: int) -> np.ndarray:
    """Flat table of sum_j cos(2 pi k_j / L) over all N = L^d lattice modes."""
    c = np.cos(2.0 * np.pi * np.arange(L) / L)
    sums = c
    for _ in range(d - 1):
        sums = np.add.outer(sums, c).ravel()
    return sums


def spectrum_term_finite(spec: LatticeSpec, w: float) -> float:
    """Per-site log-determinant sum (1/N) sum_modes log(w + d - sum_j cos omega_j).

    The largest mode value of ``sum_j cos`` is ``d`` (all-zero momentum), so
    the argument of the log reaches ``w`` and the sum needs ``w > 0``.
    """
    if not w > 0:
        raise DomainError(f"need w > 0, got {w!r}")
    sums = _mode_cos_sums(spec.L, spec.d)
    return kernels.log_mean_shifted(sums, w + spec.d)


def _spectrum_deriv_finite(spec: LatticeSpec, w: float) -> float:
    if not w > 0:
        raise DomainError(f"need w > 0, got {w!r}")
    sums = _mode_cos_sums(spec.L, spec.d)
    return kernels.inv_mean_shifted(sums, w + spec.d)


def _band_log(a: np.ndarray) -> np.ndarray:
    # (1/2pi) int_0^2pi log(a - cos t) dt = log((a + sqrt(a^2-1))/2) = arccosh(a) - log 2
    return np.arccosh(a) - _LOG2


def _band_inv(a: np.ndarray) -> np.ndarray:
    # (1/2pi) int_0^2pi dt / (a - cos t) = 1 / sqrt(a^2 - 1)
    return 1.0 / np.sqrt((a - 1.0) * (a + 1.0))


def _limit_integral(d: int, w: float, inner, spec: QuadratureSpec) -> tuple[float, float]:
    """(1/2pi)^d Brillouin integral of inner(w + d - sum cos), innermost axis exact.

    d = 2 reduces to one adaptive integral of the closed-form inner band
    integral; d = 3 uses a doubled Gauss-Legendre tensor rule on the two
    outer axes (the integrand is analytic for w > 0, so the rule converges
    geometrically, degrading only as w -> 0).
    """
    if d == 2:
        val, err = integrate(lambda t: inner(w + 2.0 - np.cos(t)), 0.0, np.pi, spec)
        return val / np.pi, err / np.pi
    # d == 3: tensor rule over [0, pi]^2, doubling until the change is in tolerance
    prev = None
    for order in (32, 64, 128, 256, 512, 1024, 2048):
        x, wt = gauss_legendre_rule(order)
        t = 0.5 * np.pi * (x + 1.0)
        wt = 0.5 * np.pi * wt
        cs = np.cos(t)
        grid = inner(w + 3.0 - np.add.outer(cs, cs))
        val = float(wt @ grid @ wt) / np.pi**2
        if prev is not None:
            err = abs(val - prev)
            if err <= max(spec.abs_tol, spec.rel_tol * abs(val)):
                return val, err
        prev = val
    raise NonConvergence(f"lattice integral (d=3, w={w!r}) did not converge")


def spectrum_term_limit(d: int, w: float, spec: QuadratureSpec | None = None) -> float:
    """Thermodynamic limit of :func:`spectrum_term_finite`:

    (2 pi)^{-d} * integral over [0,2pi]^d of log(w + d - sum_j cos omega_j).

    d = 1 is the closed form arccosh(1 + w) - log 2; d = 2, 3 use nested
    quadrature with the innermost axis integrated in closed form.  Raises
    DimensionCap for d > 3 (use finite-L mode sums there).
    """
    return _spectrum_limit_with_err(d, w, spec)[0]


def _spectrum_limit_with_err(d: int, w: float, spec: QuadratureSpec | None = None):
    if not w > 0:
        raise DomainError(f"need w > 0, got {w!r}")
    if d > 3:
        raise DimensionCap("thermodynamic-limit integrals are supported for d <= 3")
    spec = spec or QuadratureSpec()
    if d == 1:
        return float(_band_log(1.0 + w)), 1e-15
    return _limit_integral(d, w, _band_log, spec)


def _spectrum_deriv_limit(d: int, w: float, spec: QuadratureSpec | None = None) -> float:
    if not w > 0:
        raise DomainError(f"need w > 0, got {w!r}")
    if d > 3:
        raise DimensionCap("thermodynamic-limit integrals are supported for d <= 3")
    spec = spec or QuadratureSpec()
    if d == 1:
        return float(_band_inv(1.0 + w))
    return _limit_integral(d, w, _band_inv, spec)[0]


def _require_positive_J(params: SphericalParams):
    if params.J == 0:
        raise DomainError("saddle-point analysis requires J > 0")


def saddle_exponent(
    params: SphericalParams,
    w: float,
    lattice: LatticeSpec | None = None,
    spec: QuadratureSpec | None = None,
) -> float:
    """Steepest-descent exponent F(w) per site; strictly convex on (0, inf).

    ``lattice=None`` selects the thermodynamic-limit spectrum term,
    otherwise the finite-N mode sum of ``lattice`` is used.  With ``H = 0``
    the pole term at w = 0 is absent.
    """
    _require_positive_J(params)
    if not w > 0:
        raise DomainError(f"need w > 0, got {w!r}")
    J, B, H, d, beta = params.J, params.B, params.H, params.d, params.beta
    bj = beta * J
    u = w + d
    val = bj * u + (beta * B) ** 2 / (4.0 * bj * u) - np.log(bj * u)
    if H > 0:
        val += (beta * H) ** 2 / (4.0 * bj * w)
    if lattice is not None:
        if lattice.d != d:
            raise ValueError("lattice dimension disagrees with params.d")
        s = spectrum_term_finite(lattice, w)
    else:
        s = spectrum_term_limit(d, w, spec)
    return float(val - 0.5 * (np.log(bj) + s))


def saddle_exponent_deriv(
    params: SphericalParams,
    w: float,
    lattice: LatticeSpec | None = None,
    spec: QuadratureSpec | None = None,
) -> float:
    """Analytic dF/dw, used for the derivative-bisection saddle solve."""
    _require_positive_J(params)
    if not w > 0:
        raise DomainError(f"need w > 0, got {w!r}")
    J, B, H, d, beta = params.J, params.B, params.H, params.d, params.beta
    bj = beta * J
    u = w + d
    val = bj - (beta * B) ** 2 / (4.0 * bj * u * u) - 1.0 / u
    if H > 0:
        val -= (beta * H) ** 2 / (4.0 * bj * w * w)
    if lattice is not None:
        if lattice.d != d:
            raise ValueError("lattice dimension disagrees with params.d")
        sd = _spectrum_deriv_finite(lattice, w)
    else:
        sd = _spectrum_deriv_limit(d, w, spec)
    return float(val - 0.5 * sd)


_EDGE_W = 1e-10


def solve_saddle(
    params: SphericalParams,
    lattice: LatticeSpec | None = None,
    root_spec: RootSpec | None = None,
    quad_spec: QuadratureSpec | None = None,
) -> SaddleSolution:
    """Locate the saddle w0 > 0 minimizing the exponent F.

    At any finite beta the minimizer is interior (the log-determinant term
    repels it from w = 0), so the solve is well posed for all valid
    parameters; ``edge_case`` flags solutions that have collapsed onto the
    spectral edge (w0 below ~1e-10), which happens on the pinned branch
    (H -> 0 with B <= 2Jd) as beta grows.
    """
    _require_positive_J(params)
    root_spec = root_spec or RootSpec()

    def deriv(w: float) -> float:
        return saddle_exponent_deriv(params, w, lattice, quad_spec)

    lo = 1.0
    while deriv(lo) >= 0.0:
        lo /= 8.0
        if lo < 1e-300:
            raise NonConvergence("no descending derivative found near w = 0")
    hi = max(params.B / (2.0 * params.J) - params.d, 0.0) + 1.0
    while deriv(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise NonConvergence("derivative never turns positive at large w")

    res = find_min_convex(
        lambda w: saddle_exponent(params, w, lattice, quad_spec),
        (lo, hi),
        root_spec,
        derivative=deriv,
    )
    w0 = res.x_min
    f = -(1.5 / params.beta) * _LOG_PI - res.g_min / params.beta
    return SaddleSolution(
        w0=w0,
        phi_at_w0=res.g_min,
        f_per_site=f,
        iterations=res.iterations,
        mode="finite_N" if lattice is not None else "thermodynamic",
        edge_case=w0 <= _EDGE_W,
    )


def ground_saddle(
    J: float,
    B: float,
    H: float = 0.0,
    d: int = 1,
    root_spec: RootSpec | None = None,
) -> tuple[float, float]:
    """Zero-temperature saddle: (u0, e(u0)) minimizing
    e(u) = J*u + H^2/(4J(u-d)) + B^2/(4J*u) over u > d (H > 0) or u >= d
    (H = 0, where the interior/edge split is exact)."""
    if not (J > 0 and B >= 0 and H >= 0 and d >= 1):
        raise ValueError("need J > 0, B >= 0, H >= 0, d >= 1")
    if H == 0.0:
        u0 = max(float(d), B / (2.0 * J))
        return u0, J * u0 + B * B / (4.0 * J * u0)

    def e(u: float) -> float:
        return J * u + H * H / (4.0 * J * (u - d)) + B * B / (4.0 * J * u)

    def de(u: float) -> float:
        return J - H * H / (4.0 * J * (u - d) ** 2) - B * B / (4.0 * J * u * u)

    lo = d + 0.5 * H / J
    while de(lo) >= 0.0:
        lo = d + (lo - d) / 4.0
        if lo - d < 1e-300:
            raise NonConvergence("lower bracket for the ground-state saddle failed")
    hi = max(B / (2.0 * J), float(d)) + H / J + 1.0
    while de(hi) <= 0.0:
        hi *= 2.0
    res = find_min_convex(e, (lo, hi), root_spec, derivative=de)
    return res.x_min, res.g_min


def ground_energy(
    J: float,
    B: float,
    H: float = 0.0,
    d: int = 1,
    root_spec: RootSpec | None = None,
) -> float:
    """Ground-state energy per site, the beta -> infinity limit of the saddle.

    Minus the minimized :func:`ground_saddle` value; at H = 0 this is the
    closed form

        -(J*d + B^2/(4*J*d))  for B <= 2Jd,      -B  for B > 2Jd.
    """
    return -ground_saddle(J, B, H, d, root_spec)[1]


def ground_energy_h_extrapolated(
    J: float,
    B: float,
    d: int = 1,
    h_values: tuple[float, ...] = (1e-3, 1e-4, 1e-5),
    root_spec: RootSpec | None = None,
) -> float:
    """H -> 0 ground energy via linear extrapolation from small fields.

    The two smallest fields fix the extrapolating line; near the pinned
    branch the energy is linear in H with an H^(4/3) correction exactly at
    B = 2Jd, so the two-point line from {1e-4, 1e-5} lands within ~1e-6 of
    the limit everywhere.
    """
    hs = sorted(h_values)
    h1, h2 = hs[1], hs[0]
    f1 = ground_energy(J, B, h1, d, root_spec)
    f2 = ground_energy(J, B, h2, d, root_spec)
    return (f2 * h1 - f1 * h2) / (h1 - h2)


def free_energy_finite_beta(
    params: SphericalParams,
    lattice: LatticeSpec | None = None,
    root_spec: RootSpec | None = None,
    quad_spec: QuadratureSpec | None = None,
) -> FreeEnergyResult:
    """Free energy per site at finite beta from the saddle-point value,

        f = -(3/(2*beta)) * log(pi) - F(w0)/beta.

    The w-independent normalization carries every prefactor of the
    underlying Gaussian integrals, which is verified against the exact
    finite-N contour oracle; the beta -> infinity limit reproduces
    :func:`ground_energy`.
    """
    sol = solve_saddle(params, lattice, root_spec, quad_spec)
    if lattice is None and params.d > 1:
        _, s_err = _spectrum_limit_with_err(params.d, sol.w0, quad_spec)
    else:
        s_err = 1e-15
    err = 0.5 * s_err / params.beta + abs(sol.phi_at_w0) * 1e-14 / params.beta
    return FreeEnergyResult(value=sol.f_per_site, err_est=err, method="saddle", saddle=sol)


def susceptibility_at_zero_field(J: float, d: int = 1) -> float:
    """Transverse susceptibility -d^2 f_gs/dB^2 at B = 0; equals 1/(2Jd).

    Uses the H = 0 closed-form ground energy, which is exactly quadratic in
    B below the critical field, with the same five-point stencil as the
    chain susceptibility (folded by evenness in B).
    """
    if not (J > 0 and d >= 1):
        raise ValueError("need J > 0, d >= 1")
    h = 1e-3 * max(J * d, 1.0)
    f0 = ground_energy(J, 0.0, 0.0, d)
    f1 = ground_energy(J, h, 0.0, d)
    f2 = ground_energy(J, 2.0 * h, 0.0, d)
    second = (32.0 * f1 - 2.0 * f2 - 30.0 * f0) / (12.0 * h * h)
    return -second
