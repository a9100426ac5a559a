"""Analytical parametrization of the homogeneous per-site ground-state energy.

The closed form e0(n, U) = -(2 beta / pi) sin(pi n / beta) with
beta = b(U)^alpha and alpha = n^(cbrt(U)/8) is exact at U = 0, at
U -> infinity and at half filling for any U, and interpolates in
between. b(U) in [1, 2] is fixed by matching e0 at n = 1 to the exact
half-filled energy, an oscillatory Bessel integral evaluated here by
panel quadrature between the zeros of J0*J1 plus a certified tail.

Densities above half filling are reached through the particle-hole
identity e0(n, U) = e0(2 - n, U) + U (n - 1). The interval 0 < U < 0.05
is rejected: the energy there is of no use because its U-derivative
(the double occupancy) fluctuates strongly, and no reported quantity
needs it. Double occupancies additionally require U >= 0.2.

All densities are per-site values in [0, 2]; energies are in units of
the hopping t.
"""

from dataclasses import dataclass
from functools import lru_cache
import warnings

import numpy as np
from scipy import integrate, special

from . import entropy
from .errors import NumericalFailureError, UnsupportedRegimeError

#: Below this positive interaction the energy branch is refused.
U_MIN_ENERGY = 0.05
#: Below this interaction the U-derivative (double occupancy) is refused.
U_MIN_DERIVATIVE = 0.2

_TAIL_TARGET = 1e-12
_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
_N_ZERO_PAIRS = 150
_ACCEL_WINDOW = 40


def _fermi_weight(u: float, x: float) -> float:
    arg = u * x / 2.0
    return 0.0 if arg > 700.0 else 1.0 / (1.0 + np.exp(arg))


@lru_cache(maxsize=None)
def _bessel_panel_edges(n_pairs: int) -> tuple:
    zeros = np.sort(np.concatenate([special.jn_zeros(0, n_pairs),
                                    special.jn_zeros(1, n_pairs)]))
    return tuple(zeros)


@lru_cache(maxsize=None)
def lieb_wu_rhs(u: float) -> float:
    """Exact half-filled per-site energy: -4 int_0^inf J0 J1 / (x (1 + e^{Ux/2})).

    The integrand changes sign at every zero of J0*J1, so the integral is
    summed panel by panel and accelerated as an alternating series. The
    non-oscillatory part of J0*J1 decays like 1/(2 pi x^2); its remaining
    tail beyond each panel edge is added back before acceleration so the
    accelerated limit is the full integral.
    """
    if u < 0:
        raise UnsupportedRegimeError(f"interaction must be >= 0, got {u}")

    def integrand(x):
        if x == 0.0:
            return 0.25  # J1(x)/x -> 1/2 and the weight is 1/2
        return special.j0(x) * special.j1(x) / x * _fermi_weight(u, x)

    zeros = np.asarray(_bessel_panel_edges(_N_ZERO_PAIRS))
    edges = np.concatenate([[0.0], zeros])
    panels = []
    with warnings.catch_warnings():
        # the 1e-14 target triggers roundoff warnings; accuracy is checked below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            val, err = integrate.quad(integrand, a, b, **_QUAD_OPTS)
            if err > 1e-9:
                raise NumericalFailureError(
                    f"panel [{a}, {b}] of the half-filling integral reached only {err}"
                )
            panels.append(val)
            if u > 0 and len(panels) >= 8:
                tail = (2.0 / (np.pi * b * b)) * (2.0 / u) * np.exp(-min(u * b / 2.0, 700.0))
                if tail < _TAIL_TARGET:
                    break
            if abs(val) < 1e-16 and len(panels) >= 8:
                break
    panels = np.asarray(panels)
    partial = np.cumsum(panels)
    used_edges = zeros[: len(panels)]

    def smooth_tail(x0):
        g = lambda x: _fermi_weight(u, x) / (2.0 * np.pi * x**3)
        val, _ = integrate.quad(g, x0, np.inf, epsabs=1e-15, limit=200)
        return val

    k = min(_ACCEL_WINDOW, len(panels))
    seq = partial[-k:] + np.array([smooth_tail(x0) for x0 in used_edges[-k:]])
    while len(seq) > 1:
        seq = 0.5 * (seq[:-1] + seq[1:])
    return float(-4.0 * seq[0])


def _half_filling_lhs(b: float) -> float:
    # sin(pi/b) written as sin(pi (b-1)/b) so the value vanishes exactly at b = 1
    return -(2.0 * b / np.pi) * np.sin(np.pi * (b - 1.0) / b)


#: Read-through cache of solved b values, keyed by U. Seeding it in worker
#: processes avoids re-running the quadrature; entries never change results.
_B_CACHE: dict[float, float] = {}


def export_b_cache() -> dict[float, float]:
    return dict(_B_CACHE)


def prime_b_cache(values: dict[float, float]) -> None:
    _B_CACHE.update(values)


def solve_b(u: float) -> float:
    """Interpolation parameter b(U) in [1, 2], from matching e0 at half filling."""
    cached = _B_CACHE.get(u)
    if cached is not None:
        return cached
    rhs = lieb_wu_rhs(u)
    if rhs > 0.0 or rhs < -4.0 / np.pi - 1e-10:
        raise NumericalFailureError(f"half-filling energy {rhs} outside (-4/pi, 0] at U={u}")
    # quadrature error can push rhs a hair below the analytic floor -4/pi
    rhs = max(rhs, -4.0 / np.pi)
    lo, hi = 1.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _half_filling_lhs(mid) - rhs <= 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-16:
            break
    b = 0.5 * (lo + hi)
    residual = abs(_half_filling_lhs(b) - rhs)
    if residual > 1e-12:
        raise NumericalFailureError(f"b(U) residual {residual} at U={u}")
    _B_CACHE[u] = b
    return b


@dataclass(frozen=True)
class FvcEvaluation:
    """Intermediate quantities of one homogeneous energy evaluation."""

    u: float
    b: float
    alpha: float
    beta: float
    e0: float


def _check_u_energy(u: float):
    if u < 0.0:
        raise UnsupportedRegimeError(f"interaction must be >= 0, got {u}")
    if 0.0 < u < U_MIN_ENERGY:
        raise UnsupportedRegimeError(
            f"0 < U < {U_MIN_ENERGY} is not supported (unstable derivative regime), got {u}"
        )


def e0_fvc(n, u: float):
    """Per-site ground-state energy at density n (scalar or array) and interaction U."""
    _check_u_energy(u)
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0.0) or np.any(n_arr > 2.0):
        raise UnsupportedRegimeError("density outside [0, 2]")
    low = np.minimum(n_arr, 2.0 - n_arr)
    if u == 0.0:
        base = -(4.0 / np.pi) * np.sin(np.pi * low / 2.0)
    else:
        b = solve_b(u)
        exponent = np.cbrt(u) / 8.0
        alpha = np.where(low > 0.0, np.power(np.where(low > 0.0, low, 1.0), exponent), 0.0)
        beta = np.power(b, alpha)
        base = -(2.0 * beta / np.pi) * np.sin(np.pi * low / beta)
    out = base + np.where(n_arr > 1.0, u * (n_arr - 1.0), 0.0)
    return out if n_arr.ndim else float(out)


def evaluate(n: float, u: float) -> FvcEvaluation:
    """Energy evaluation with its internals exposed, for n <= 1."""
    _check_u_energy(u)
    if not 0.0 <= n <= 1.0:
        raise UnsupportedRegimeError(f"evaluate() expects n in [0, 1], got {n}")
    b = 2.0 if u == 0.0 else solve_b(u)
    alpha = 0.0 if n == 0.0 else n ** (np.cbrt(u) / 8.0)
    beta = b**alpha
    return FvcEvaluation(u=u, b=b, alpha=alpha, beta=beta, e0=float(e0_fvc(n, u)))


_DERIV_STEP = 1e-3


def double_occupancy(n, u: float):
    """Double occupancy as the U-derivative of the per-site energy.

    Central difference with one Richardson refinement; b(U) is re-solved
    at every shifted interaction. Result clamped into [0, 1]. Above half
    filling the particle-hole image w2(n) = w2(2 - n) + (n - 1) is used.
    """
    if u < U_MIN_DERIVATIVE:
        raise UnsupportedRegimeError(
            f"double occupancy needs U >= {U_MIN_DERIVATIVE}, got {u}"
        )
    n_arr = np.asarray(n, dtype=float)
    low = np.minimum(n_arr, 2.0 - n_arr)
    h = _DERIV_STEP

    def central(step):
        return (e0_fvc(low, u + step) - e0_fvc(low, u - step)) / (2.0 * step)

    refined = (4.0 * central(h / 2.0) - central(h)) / 3.0
    w2 = np.clip(refined, 0.0, 1.0)
    out = w2 + np.where(n_arr > 1.0, n_arr - 1.0, 0.0)
    return out if n_arr.ndim else float(out)


def homogeneous_entropies(n: float, u: float) -> tuple[float, float]:
    """(von Neumann, linear) entropy pair of the homogeneous chain at (n, U)."""
    n_low = 2.0 - n if n > 1.0 else n
    p = entropy.probs_from_density(n_low, double_occupancy(n_low, u))
    return entropy.von_neumann(p), entropy.linear(p)


def homogeneous_entropies_array(n, u: float):
    """Vectorized entropy pair over a density array; used by the LDA average."""
    n_arr = np.clip(np.asarray(n, dtype=float), 0.0, 2.0)
    low = np.minimum(n_arr, 2.0 - n_arr)
    w2 = np.asarray(double_occupancy(low, u))
    single = np.clip(low / 2.0 - w2, 0.0, 1.0)
    w0 = np.clip(1.0 - 2.0 * single - w2, 0.0, 1.0)
    probs = np.stack([single, single, w2, w0], axis=-1)
    safe = np.where(probs > 0.0, probs, 1.0)
    s = -(probs * np.log(safe)).sum(axis=-1) / entropy.LN4
    lin = (4.0 / 3.0) * (1.0 - (probs * probs).sum(axis=-1))
    return s, lin
