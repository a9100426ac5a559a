"""Exact-diagonalization ground states for small chains.

The many-body basis is the tensor product of two single-spin sectors,
each enumerated as bit masks with fixed popcount in ascending numeric
(lexicographic) order. A basis state is the pair (up-mask, down-mask)
with flat index i_up * D_down + i_down. With up operators ordered before
down operators, a nearest-neighbor hop never crosses an occupied
orbital of its own spin sector, but fermionic parity is still computed
generally from the bits strictly between the hop endpoints.

The Hamiltonian is real symmetric and applied matrix-free per spin
sector: reshaping the vector to (D_up, D_down), hopping acts as a
sparse matrix from the left (up) and right (down), the interaction and
external potential as a precomputed diagonal.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .chains import ChainSpec
from .errors import CapacityError, InvalidSpecError, NumericalFailureError

#: Largest many-body dimension attempted by default.
DEFAULT_DIMENSION_CAP = 2_000_000

#: Dense diagonalization is available as cross-check up to this dimension.
DENSE_LIMIT = 2000


def _masks_with_popcount(length: int, count: int) -> np.ndarray:
    masks = [sum(1 << i for i in sites) for sites in combinations(range(length), count)]
    return np.array(sorted(masks), dtype=np.int64)


@dataclass(frozen=True)
class FockBasis:
    """Occupation-number basis of one (L, N_up, N_down) sector."""

    length: int
    n_up: int
    n_down: int
    up_masks: np.ndarray
    down_masks: np.ndarray

    @classmethod
    def build(cls, length: int, n_up: int, n_down: int) -> "FockBasis":
        if not (0 <= n_up <= length and 0 <= n_down <= length):
            raise InvalidSpecError("particle numbers outside [0, L]")
        return cls(length, n_up, n_down,
                   _masks_with_popcount(length, n_up),
                   _masks_with_popcount(length, n_down))

    @property
    def dim_up(self) -> int:
        return len(self.up_masks)

    @property
    def dim_down(self) -> int:
        return len(self.down_masks)

    @property
    def dimension(self) -> int:
        return self.dim_up * self.dim_down

    def state_index(self, up_mask: int, down_mask: int) -> int:
        iu = int(np.searchsorted(self.up_masks, up_mask))
        idn = int(np.searchsorted(self.down_masks, down_mask))
        if iu >= self.dim_up or self.up_masks[iu] != up_mask:
            raise InvalidSpecError(f"up mask {up_mask:b} not in basis")
        if idn >= self.dim_down or self.down_masks[idn] != down_mask:
            raise InvalidSpecError(f"down mask {down_mask:b} not in basis")
        return iu * self.dim_down + idn

    def state_of_index(self, index: int) -> tuple[int, int]:
        iu, idn = divmod(index, self.dim_down)
        return int(self.up_masks[iu]), int(self.down_masks[idn])

    def occupation_matrix(self, masks: np.ndarray) -> np.ndarray:
        """Bool array (dim, L): orbital occupation of every mask."""
        sites = np.arange(self.length)
        return (masks[:, None] >> sites[None, :]) & 1 == 1


def _hop_parity(mask: int, i: int, j: int) -> int:
    """Parity of occupied orbitals strictly between sites i < j."""
    lo, hi = (i, j) if i < j else (j, i)
    between = mask & (((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
    return bin(between).count("1") & 1


def _sector_hopping(length: int, masks: np.ndarray, t: float = 1.0) -> sp.csr_matrix:
    """Single-spin nearest-neighbor hopping matrix with fermionic signs."""
    index = {int(m): k for k, m in enumerate(masks)}
    rows, cols, vals = [], [], []
    for k, mask in enumerate(masks):
        mask = int(mask)
        for i in range(length - 1):
            j = i + 1
            occ_i = (mask >> i) & 1
            occ_j = (mask >> j) & 1
            if occ_i == occ_j:
                continue
            target = mask ^ (1 << i) ^ (1 << j)
            sign = -1.0 if _hop_parity(mask, i, j) else 1.0
            rows.append(index[target])
            cols.append(k)
            vals.append(-t * sign)
    dim = len(masks)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


@lru_cache(maxsize=32)
def _cached_basis(length: int, n_up: int, n_down: int) -> FockBasis:
    return FockBasis.build(length, n_up, n_down)


def basis_for(spec: ChainSpec) -> FockBasis:
    return _cached_basis(spec.length, spec.n_up, spec.n_down)


class _HamiltonianPieces:
    """Per-sector hopping matrices and the many-body diagonal for one spec."""

    def __init__(self, spec: ChainSpec, basis: FockBasis):
        self.basis = basis
        self.hop_up = _sector_hopping(spec.length, basis.up_masks)
        self.hop_down = _sector_hopping(spec.length, basis.down_masks)
        occ_up = basis.occupation_matrix(basis.up_masks).astype(float)
        occ_down = basis.occupation_matrix(basis.down_masks).astype(float)
        pot = np.asarray(spec.potential)
        pot_up = occ_up @ pot
        pot_down = occ_down @ pot
        double = (basis.up_masks[:, None] & basis.down_masks[None, :])
        double_count = np.zeros(double.shape)
        for site in range(spec.length):
            double_count += (double >> site) & 1
        self.diagonal = (spec.u * double_count
                         + pot_up[:, None] + pot_down[None, :])

    def matvec(self, v: np.ndarray) -> np.ndarray:
        m = v.reshape(self.basis.dim_up, self.basis.dim_down)
        out = self.hop_up @ m + m @ self.hop_down.T + self.diagonal * m
        return out.ravel()


@lru_cache(maxsize=8)
def _cached_pieces_key(length, n_up, n_down, u, pot_key):
    spec = ChainSpec(length, n_up, n_down, u, np.array(pot_key))
    return _HamiltonianPieces(spec, basis_for(spec))


def _pieces(spec: ChainSpec) -> _HamiltonianPieces:
    return _cached_pieces_key(spec.length, spec.n_up, spec.n_down, spec.u,
                              tuple(float(x) for x in spec.potential))


def apply_hamiltonian(spec: ChainSpec, v: np.ndarray) -> np.ndarray:
    """H @ v with t = 1 on the sector basis of the spec."""
    basis = basis_for(spec)
    v = np.asarray(v, dtype=float)
    if v.shape != (basis.dimension,):
        raise InvalidSpecError(
            f"vector has shape {v.shape}, expected ({basis.dimension},)"
        )
    return _pieces(spec).matvec(v)


def dense_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense H for cross-checks; refuses dimensions beyond DENSE_LIMIT."""
    basis = basis_for(spec)
    if basis.dimension > DENSE_LIMIT:
        raise CapacityError(
            f"dense Hamiltonian limited to dimension {DENSE_LIMIT}, got {basis.dimension}",
            dimension=basis.dimension,
        )
    pieces = _pieces(spec)
    eye_up = sp.identity(basis.dim_up, format="csr")
    eye_down = sp.identity(basis.dim_down, format="csr")
    h = sp.kron(pieces.hop_up, eye_down) + sp.kron(eye_up, pieces.hop_down)
    h = h.toarray()
    h[np.diag_indices_from(h)] += pieces.diagonal.ravel()
    return h


@dataclass(frozen=True)
class GroundState:
    """Lowest eigenpair: energy in units of t and a real unit vector."""

    energy: float
    amplitudes: np.ndarray


def ground_state(spec: ChainSpec, method: str = "lanczos",
                 cap: int = DEFAULT_DIMENSION_CAP) -> GroundState:
    """Ground state of the spec, by Lanczos iteration or dense diagonalization."""
    basis = basis_for(spec)
    dim = basis.dimension
    if dim > cap:
        raise CapacityError(
            f"basis dimension {dim} exceeds cap {cap}", dimension=dim
        )
    if method == "dense" or dim < 4:
        h = dense_hamiltonian(spec)
        evals, evecs = np.linalg.eigh(h)
        return GroundState(float(evals[0]), evecs[:, 0].copy())
    if method != "lanczos":
        raise InvalidSpecError(f"unknown method {method!r}")
    pieces = _pieces(spec)
    op = spla.LinearOperator((dim, dim), matvec=pieces.matvec, dtype=float)
    v0 = np.full(dim, 1.0 / np.sqrt(dim))
    try:
        evals, evecs = spla.eigsh(op, k=1, which="SA", v0=v0, tol=1e-12,
                                  maxiter=10000)
    except spla.ArpackNoConvergence as exc:
        raise NumericalFailureError(f"Lanczos did not converge: {exc}") from exc
    vec = evecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    return GroundState(float(evals[0]), vec)


def spectral_gap(spec: ChainSpec) -> float:
    """E1 - E0 from the dense solver; used to certify non-degeneracy in tests."""
    h = dense_hamiltonian(spec)
    evals = np.linalg.eigvalsh(h)
    return float(evals[1] - evals[0]) if len(evals) > 1 else np.inf


def _site_weights(gs: GroundState, basis: FockBasis):
    """Per-site sums of squared amplitudes split by site occupancy class.

    Returns (p_up, p_down, p_double) as length-L arrays, where p_up is
    the probability that the site holds an up particle (regardless of
    down) and so on.
    """
    m = gs.amplitudes.reshape(basis.dim_up, basis.dim_down)
    p = m * m
    occ_up = basis.occupation_matrix(basis.up_masks).astype(float)    # (Du, L)
    occ_down = basis.occupation_matrix(basis.down_masks).astype(float)
    up_weight = occ_up.T @ p            # (L, Dd)
    p_up = up_weight.sum(axis=1)
    p_down = (p @ occ_down).sum(axis=0)
    p_double = np.einsum("ld,dl->l", up_weight, occ_down)
    return p_up, p_down, p_double


def site_probabilities(gs: GroundState, basis: FockBasis, site: int):
    """Occupation probabilities (up only, down only, double, empty) at a site."""
    from .entropy import OccupationProbabilities

    if not 0 <= site < basis.length:
        raise InvalidSpecError(f"site {site} outside chain of length {basis.length}")
    p_up, p_down, p_double = _site_weights(gs, basis)
    w2 = p_double[site]
    w_up = p_up[site] - w2
    w_down = p_down[site] - w2
    return OccupationProbabilities(w_up, w_down, w2, 1.0 - w_up - w_down - w2)


def density_profile(gs: GroundState, basis: FockBasis) -> np.ndarray:
    """Per-site densities n_i = <n_up + n_down>; sums to the particle number."""
    p_up, p_down, _ = _site_weights(gs, basis)
    return p_up + p_down


def site_entropy_average(spec: ChainSpec, method: str = "lanczos") -> tuple[float, float]:
    """Site-averaged (von Neumann, linear) entropies of the ED ground state."""
    from . import entropy

    basis = basis_for(spec)
    gs = ground_state(spec, method=method)
    s_vals, l_vals = [], []
    for site in range(spec.length):
        p = site_probabilities(gs, basis, site)
        s_vals.append(entropy.von_neumann(p))
        l_vals.append(entropy.linear(p))
    return float(np.mean(s_vals)), float(np.mean(l_vals))
