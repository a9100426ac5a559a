"""Chain specifications and external potential profiles.

Three system classes are supported: clean chains (V = 0 everywhere),
chains with randomly placed pointlike impurities, and X:Y superlattices
(X impurity sites of strength V followed by Y clean sites, repeated).
Site indexing is 1-based in documentation and file output; arrays here
are 0-based as usual.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InvalidSpecError


@dataclass(frozen=True)
class Homogeneous:
    """All site energies zero."""


@dataclass(frozen=True)
class Disorder:
    """Randomly placed impurities: concentration, strength and RNG seed."""

    concentration: float
    strength: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.concentration <= 1.0:
            raise InvalidSpecError(
                f"impurity concentration must lie in [0, 1], got {self.concentration}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpecError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class Superlattice:
    """Periodic X:Y modulation: x impurity sites of given strength, y clean sites."""

    x: int
    y: int
    strength: float

    def __post_init__(self):
        if self.x < 1 or self.y < 1:
            raise InvalidSpecError(
                f"superlattice blocks must have x >= 1 and y >= 1, got {self.x}:{self.y}"
            )


PotentialSpec = Homogeneous | Disorder | Superlattice


def impurity_count(concentration: float, length: int) -> int:
    """Number of impurity sites for a given concentration: round-half-up of C*L."""
    if not 0.0 <= concentration <= 1.0:
        raise InvalidSpecError(f"concentration must lie in [0, 1], got {concentration}")
    return int(math.floor(concentration * length + 0.5))


def build_potential(spec: PotentialSpec, length: int) -> np.ndarray:
    """Site-energy vector of the requested length for a potential spec.

    Disorder placement uses a partial Fisher-Yates shuffle over site
    indices driven by a seeded PCG64 generator, so the impurity
    configuration is fully determined by the seed.
    """
    if length < 1:
        raise InvalidSpecError(f"chain length must be >= 1, got {length}")
    if isinstance(spec, Homogeneous):
        return np.zeros(length)
    if isinstance(spec, Superlattice):
        period = spec.x + spec.y
        pattern = np.where(np.arange(length) % period < spec.x, spec.strength, 0.0)
        return pattern
    if isinstance(spec, Disorder):
        k = impurity_count(spec.concentration, length)
        rng = np.random.default_rng(spec.seed)
        idx = np.arange(length)
        for j in range(k):
            r = j + rng.integers(length - j)
            idx[j], idx[r] = idx[r], idx[j]
        pot = np.zeros(length)
        pot[idx[:k]] = spec.strength
        return pot
    raise InvalidSpecError(f"unknown potential spec {spec!r}")


@dataclass(frozen=True)
class ChainSpec:
    """Full problem definition for one open-boundary Hubbard chain.

    Energies are in units of the hopping t (t = 1). The potential vector
    holds one site energy per site. Populations are spin balanced.
    """

    length: int
    n_up: int
    n_down: int
    u: float
    potential: np.ndarray = field(default=None)

    boundary = "open"

    def __post_init__(self):
        if self.length < 1:
            raise InvalidSpecError(f"chain length must be >= 1, got {self.length}")
        for n in (self.n_up, self.n_down):
            if not 0 <= n <= self.length:
                raise InvalidSpecError(
                    f"particle number {n} outside [0, {self.length}]"
                )
        if self.n_up != self.n_down:
            raise InvalidSpecError(
                f"spin-balanced populations required, got {self.n_up} up / {self.n_down} down"
            )
        if self.u < 0:
            raise InvalidSpecError("attractive interaction (U < 0) is not supported")
        pot = np.zeros(self.length) if self.potential is None else np.asarray(
            self.potential, dtype=float
        )
        if pot.shape != (self.length,):
            raise InvalidSpecError(
                f"potential has shape {pot.shape}, expected ({self.length},)"
            )
        pot = pot.copy()
        pot.setflags(write=False)
        object.__setattr__(self, "potential", pot)

    @property
    def n_total(self) -> int:
        return self.n_up + self.n_down

    @property
    def filling(self) -> float:
        return self.n_total / self.length

    @classmethod
    def from_potential_spec(cls, pspec: PotentialSpec, length: int, n_up: int,
                            n_down: int, u: float) -> "ChainSpec":
        return cls(length, n_up, n_down, u, build_potential(pspec, length))
