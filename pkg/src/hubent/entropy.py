"""Single-site entanglement measures on occupation probabilities.

A site of a spin-balanced chain is described by the diagonal of its
reduced density matrix in the occupation basis {up, down, double, empty}
(coherences between occupation sectors vanish at fixed particle
numbers, so no matrix diagonalization is ever needed). Both entropies
are normalized to [0, 1]: the von Neumann entropy by 1/ln(4), the
linear entropy by 4/3.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOrderError, OrderNotFoundError, ProbabilityDomainError

LN4 = np.log(4.0)

# Tiny negatives from numerical differentiation upstream are clamped to
# zero; anything below HARD_FLOOR is treated as a genuine bug.
CLAMP_TOL = 1e-9
HARD_FLOOR = -1e-6
SUM_TOL = 1e-9


def _clamp(value: float, name: str) -> float:
    if value < HARD_FLOOR:
        raise ProbabilityDomainError(f"{name} = {value} is negative beyond tolerance")
    if value > 1.0 + CLAMP_TOL:
        raise ProbabilityDomainError(f"{name} = {value} exceeds 1 beyond tolerance")
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class OccupationProbabilities:
    """The 4-vector (w_up, w_down, w_double, w_empty) on one site."""

    up: float
    down: float
    double: float
    empty: float

    def __post_init__(self):
        for name in ("up", "down", "double", "empty"):
            object.__setattr__(self, name, _clamp(getattr(self, name), f"w_{name}"))
        total = self.up + self.down + self.double + self.empty
        if abs(total - 1.0) > SUM_TOL:
            raise ProbabilityDomainError(
                f"probabilities sum to {total}, expected 1 within {SUM_TOL}"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.up, self.down, self.double, self.empty])


def probs_from_density(n: float, w2: float) -> OccupationProbabilities:
    """Occupation probabilities of a site with density n and double occupancy w2.

    w_up = w_down = n/2 - w2 and w_empty closes the sum to 1.
    """
    if not 0.0 <= n <= 2.0:
        raise ProbabilityDomainError(f"site density {n} outside [0, 2]")
    single = n / 2.0 - w2
    return OccupationProbabilities(single, single, w2, 1.0 - 2.0 * single - w2)


def von_neumann(p: OccupationProbabilities) -> float:
    """Normalized von Neumann entropy -(1/ln 4) sum w ln w, with 0 ln 0 = 0."""
    w = p.as_array()
    nz = w[w > 0.0]
    return float(-(nz * np.log(nz)).sum() / LN4)


def linear(p: OccupationProbabilities) -> float:
    """Normalized linear entropy (4/3)(1 - sum w^2)."""
    w = p.as_array()
    return float((4.0 / 3.0) * (1.0 - (w * w).sum()))


def taylor_entropy(p: OccupationProbabilities, order: int) -> float:
    """Expansion of the von Neumann entropy around w = 1, truncated at `order`.

    Order 1 is proportional to the linear entropy; as the order grows the
    value converges to von_neumann(p).
    """
    if order < 1:
        raise InvalidOrderError(f"expansion order must be >= 1, got {order}")
    w = p.as_array()
    x = w - 1.0
    total = 0.0
    power = np.ones_like(x)
    for m in range(1, order + 1):
        power = power * x
        total += ((-1.0) ** (m + 1) / m) * float((w * power).sum())
    return -total / LN4


def _taylor_curves(prob_list, max_order):
    """S_l for l = 1..max_order for every probability vector, shape (max_order, npts)."""
    W = np.stack([p.as_array() for p in prob_list])           # (npts, 4)
    X = W - 1.0
    out = np.empty((max_order, W.shape[0]))
    power = np.ones_like(X)
    acc = np.zeros(W.shape[0])
    for m in range(1, max_order + 1):
        power = power * X
        acc = acc + ((-1.0) ** (m + 1) / m) * (W * power).sum(axis=1)
        out[m - 1] = -acc / LN4
    return out


MAX_MONOTONE_ORDER = 200


def minimal_monotone_order(n: float, u_grid, max_order: int = MAX_MONOTONE_ORDER) -> int:
    """Smallest order whose truncated entropy decreases monotonically along u_grid.

    Probabilities come from the homogeneous functional pipeline at fixed
    density n. Monotone non-increase over the grid is the operational
    reading of "qualitatively recovers the entanglement".
    """
    from . import fvc

    u_grid = np.asarray(u_grid, dtype=float)
    if u_grid.ndim != 1 or len(u_grid) < 2 or np.any(np.diff(u_grid) <= 0):
        raise InvalidOrderError("u_grid must be strictly increasing with >= 2 points")
    if not 0.0 < n <= 1.0:
        raise InvalidOrderError(f"density must lie in (0, 1], got {n}")
    probs = [probs_from_density(n, fvc.double_occupancy(n, u)) for u in u_grid]
    curves = _taylor_curves(probs, max_order)
    diffs = np.diff(curves, axis=1)
    ok = (diffs <= 1e-12).all(axis=1)
    hits = np.nonzero(ok)[0]
    if len(hits) == 0:
        best = int(np.argmin((diffs > 1e-12).sum(axis=1))) + 1
        raise OrderNotFoundError(
            f"no order <= {max_order} is monotone non-increasing on the grid",
            best_order=best,
        )
    return int(hits[0]) + 1
