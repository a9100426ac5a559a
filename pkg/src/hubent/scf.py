"""Kohn-Sham self-consistent densities and LDA entanglement averages.

The effective single-particle problem is a tridiagonal open chain with
diagonal V_i + U n_i / 2 + v_xc(n_i, U), where the Hartree term comes
from the split e_H = U n^2 / 4 and v_xc is the density derivative of
e_xc(n, U) = e0(n, U) - e0(n, 0) - U n^2 / 4 built on the homogeneous
energy functional.

Two stabilizers are needed for disordered chains and are on by default:

* Fermi smearing of the orbital occupations (width ``smearing``). With
  sharp aufbau filling, near-degenerate localized frontier orbitals make
  the density map discontinuous and the iteration enters a two-cycle
  that no mixing weight can damp; smearing restores continuity. The
  zero-temperature limit (``smearing = 0``) falls back to equal
  fractional occupation across exactly degenerate frontier orbitals.
* Linear interpolation of v_xc across the half-filling discontinuity
  inside |n - 1| < ``mott_width``. The bare jump (the Mott gap) pins
  impurity-site densities at n = 1 and makes them oscillate across it.

Plain linear mixing stalls on these chains even when stabilized, so the
default accelerator is Anderson mixing over a short residual history;
``accel="linear"`` restores the plain damped iteration.
"""

from dataclasses import dataclass, replace
import os

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import fvc
from .chains import ChainSpec, Disorder, build_potential
from .errors import ConvergenceError, InvalidSpecError

_XC_STEP = 1e-4


@dataclass(frozen=True)
class ScfConfig:
    mixing: float = 0.3           # linear-mixing weight (also Anderson damping base)
    tol: float = 1e-8             # max-norm density change threshold
    max_iter: int = 5000
    smearing: float = 0.02        # Fermi smearing width in units of t; 0 = aufbau
    mott_width: float = 0.1       # v_xc interpolation half-width around n = 1
    accel: str = "anderson"       # "anderson" or "linear"
    history: int = 5              # Anderson residual history length
    damping: float = 0.2          # Anderson damping

    def __post_init__(self):
        if not 0.0 < self.mixing <= 1.0:
            raise InvalidSpecError(f"mixing must lie in (0, 1], got {self.mixing}")
        if self.tol <= 0.0:
            raise InvalidSpecError(f"tol must be positive, got {self.tol}")
        if self.accel not in ("anderson", "linear"):
            raise InvalidSpecError(f"unknown accelerator {self.accel!r}")


#: Fallback configurations tried in order when a sample fails to converge.
RETRY_LADDER = (
    ScfConfig(smearing=0.05, mott_width=0.15, history=8, damping=0.1, max_iter=3000),
    ScfConfig(smearing=0.05, mott_width=0.2, history=10, damping=0.05, max_iter=6000),
)


@dataclass(frozen=True)
class DensityProfile:
    """Per-site densities plus the provenance tag ('scf' or 'exact')."""

    n: np.ndarray
    source: str = "scf"
    iterations: int = 0

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        if np.any(n < -1e-9) or np.any(n > 2.0 + 1e-9):
            raise InvalidSpecError("density outside [0, 2]")
        n = np.clip(n, 0.0, 2.0)
        n.setflags(write=False)
        object.__setattr__(self, "n", n)


@dataclass(frozen=True)
class EntropyReport:
    s_avg: float
    l_avg: float
    per_site_s: np.ndarray | None = None
    per_site_l: np.ndarray | None = None
    s_std: float | None = None
    l_std: float | None = None


def exchange_correlation_energy(n, u: float):
    """e_xc per site: interaction energy beyond Hartree, from the homogeneous functional."""
    n = np.asarray(n, dtype=float)
    out = fvc.e0_fvc(n, u) - fvc.e0_fvc(n, 0.0) - u * n * n / 4.0
    return out if out.ndim else float(out)


def xc_potential(n, u: float, mott_width: float = 1e-3):
    """v_xc = d e_xc / d n by central differences, scalar or array.

    e_xc has a derivative discontinuity at n = 1 (the Mott gap); inside
    |n - 1| < mott_width the potential is linearly interpolated between
    the one-sided values, which at the midpoint equals their average.
    Boundary densities use one-sided differences.
    """
    n_arr = np.clip(np.asarray(n, dtype=float), 0.0, 2.0)
    if u == 0.0:
        out = np.zeros_like(n_arr)
        return out if n_arr.ndim else 0.0
    h = _XC_STEP
    lo = np.maximum(n_arr - h, 0.0)
    hi = np.minimum(n_arr + h, 2.0)
    v = (exchange_correlation_energy(hi, u) - exchange_correlation_energy(lo, u)) / (hi - lo)
    w = mott_width
    near = np.abs(n_arr - 1.0) < w
    if np.any(near):
        v_lo = float(xc_potential(1.0 - w, u, mott_width=0.0))
        v_hi = float(xc_potential(1.0 + w, u, mott_width=0.0))
        v = np.where(near, v_lo + (v_hi - v_lo) * (n_arr - (1.0 - w)) / (2.0 * w), v)
    return v if n_arr.ndim else float(v)


def _aufbau_occupations(evals: np.ndarray, n_orb: int) -> np.ndarray:
    """Fill the n_orb lowest orbitals; exact frontier degeneracies share equally."""
    f = np.zeros(len(evals))
    if n_orb == 0:
        return f
    fermi = evals[n_orb - 1]
    degenerate = np.abs(evals - fermi) < 1e-10
    full = evals < fermi - 1e-10
    f[full] = 1.0
    f[degenerate] = (n_orb - full.sum()) / degenerate.sum()
    return f


def _fermi_occupations(evals: np.ndarray, n_orb: int, width: float) -> np.ndarray:
    if width <= 0.0:
        return _aufbau_occupations(evals, n_orb)
    lo, hi = evals[0] - 20.0, evals[-1] + 20.0
    for _ in range(80):
        mu = 0.5 * (lo + hi)
        f = 1.0 / (1.0 + np.exp(np.clip((evals - mu) / width, -700.0, 700.0)))
        if f.sum() < n_orb:
            lo = mu
        else:
            hi = mu
    f = 1.0 / (1.0 + np.exp(np.clip((evals - 0.5 * (lo + hi)) / width, -700.0, 700.0)))
    return f * (n_orb / f.sum())


def _density_map(n: np.ndarray, potential: np.ndarray, n_orb: int, u: float,
                 cfg: ScfConfig) -> np.ndarray:
    """One Kohn-Sham step: diagonal update, diagonalize, occupy, new density."""
    diag = potential + u * n / 2.0 + xc_potential(n, u, mott_width=cfg.mott_width)
    evals, evecs = eigh_tridiagonal(diag, -np.ones(len(diag) - 1))
    return 2.0 * (evecs**2 @ _fermi_occupations(evals, n_orb, cfg.smearing))


def _noninteracting_density(potential: np.ndarray, n_orb: int, cfg: ScfConfig) -> np.ndarray:
    evals, evecs = eigh_tridiagonal(potential, -np.ones(len(potential) - 1))
    return 2.0 * (evecs**2 @ _fermi_occupations(evals, n_orb, cfg.smearing))


def solve_scf(spec: ChainSpec, cfg: ScfConfig = ScfConfig(),
              n0: np.ndarray | None = None) -> DensityProfile:
    """Self-consistent density profile for a spin-balanced chain."""
    if spec.n_total % 2:
        raise InvalidSpecError("particle number must be even")
    n_orb = spec.n_total // 2
    potential = np.asarray(spec.potential)
    n = _noninteracting_density(potential, n_orb, cfg) if n0 is None \
        else np.asarray(n0, dtype=float).copy()
    if spec.u == 0.0:
        return DensityProfile(n, source="scf", iterations=1)

    history_x: list[np.ndarray] = []
    history_f: list[np.ndarray] = []
    residuals = []
    for it in range(cfg.max_iter):
        g = _density_map(n, potential, n_orb, spec.u, cfg)
        f = g - n
        residual = float(np.max(np.abs(f)))
        residuals.append(residual)
        if residual < cfg.tol:
            return DensityProfile(g, source="scf", iterations=it + 1)
        if cfg.accel == "linear":
            n = n + cfg.mixing * f
        else:
            history_x.append(n.copy())
            history_f.append(f.copy())
            if len(history_x) > cfg.history:
                history_x.pop(0)
                history_f.pop(0)
            if len(history_x) == 1:
                n = n + cfg.damping * f
            else:
                df = np.array([history_f[i + 1] - history_f[i]
                               for i in range(len(history_f) - 1)]).T
                dx = np.array([history_x[i + 1] - history_x[i]
                               for i in range(len(history_x) - 1)]).T
                gamma, *_ = np.linalg.lstsq(df, f, rcond=1e-10)
                n = n + cfg.damping * f - (dx + cfg.damping * df) @ gamma
        n = np.clip(n, 0.0, 2.0)
        n *= spec.n_total / n.sum()
    raise ConvergenceError(
        f"SCF did not converge in {cfg.max_iter} iterations "
        f"(final residual {residuals[-1]:.3e})",
        residual_history=residuals,
    )


def solve_scf_robust(spec: ChainSpec, cfg: ScfConfig = ScfConfig(),
                     n0: np.ndarray | None = None) -> DensityProfile:
    """solve_scf with the fallback ladder of stabler configurations."""
    last = None
    for attempt in (cfg, *RETRY_LADDER):
        try:
            return solve_scf(spec, attempt, n0=n0)
        except ConvergenceError as exc:
            last = exc
    raise last


def lda_entropies(profile: DensityProfile, u: float,
                  per_site: bool = False) -> EntropyReport:
    """Site-averaged entropies: the homogeneous functional evaluated at each n_i."""
    s, lin = fvc.homogeneous_entropies_array(profile.n, u)
    return EntropyReport(
        s_avg=float(s.mean()), l_avg=float(lin.mean()),
        per_site_s=s if per_site else None,
        per_site_l=lin if per_site else None,
    )


def _sample_seed(master_seed: int, sample: int) -> int:
    return (int(master_seed) ^ sample) & (2**64 - 1)


def _disorder_sample_scan(args):
    """Entropies of one disorder realization over a full U grid (warm-started)."""
    (length, n_total, u_grid, concentration, strength, seed, cfg, b_cache) = args
    fvc.prime_b_cache(b_cache)
    potential = build_potential(Disorder(concentration, strength, seed), length)
    out = np.empty((len(u_grid), 2))
    warm = None
    for k, u in enumerate(u_grid):
        spec = ChainSpec(length, n_total // 2, n_total // 2, u, potential)
        try:
            profile = solve_scf_robust(spec, cfg, n0=warm)
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"disorder sample with seed {seed} failed at U={u}: {exc}",
                residual_history=exc.residual_history,
            ) from exc
        warm = profile.n
        report = lda_entropies(profile, u)
        out[k] = (report.s_avg, report.l_avg)
    return out


def _worker_count() -> int:
    raw = os.environ.get("HUBENT_WORKERS", "1")
    count = int(raw)
    if count == 0:
        count = os.cpu_count() or 1
    return max(count, 1)


def disorder_ensemble_scan(length: int, n_total: int, u_grid, concentration: float,
                           strength: float, n_samples: int, master_seed: int,
                           cfg: ScfConfig = ScfConfig()):
    """Ensemble means and standard deviations of (S, L) over a U grid.

    Returns arrays (s_mean, s_std, l_mean, l_std), each of len(u_grid).
    Samples are independent and may be computed by worker processes; the
    reduction always runs in sample order, so results do not depend on
    the worker count (HUBENT_WORKERS, 0 = all cores).
    """
    if n_samples < 1:
        raise InvalidSpecError("n_samples must be >= 1")
    u_grid = np.asarray(u_grid, dtype=float)
    # Solve b(U) for the grid (and derivative stencils) once, share with workers.
    for u in u_grid:
        fvc.double_occupancy(0.5, float(u))
    b_cache = fvc.export_b_cache()
    jobs = [(length, n_total, u_grid, concentration, strength,
             _sample_seed(master_seed, s), cfg, b_cache)
            for s in range(n_samples)]
    workers = _worker_count()
    if workers == 1 or n_samples == 1:
        results = [_disorder_sample_scan(job) for job in jobs]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_disorder_sample_scan, jobs))
    stacked = np.stack(results)          # (n_samples, n_u, 2)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0, ddof=0)
    return mean[:, 0], std[:, 0], mean[:, 1], std[:, 1]


def disorder_ensemble(length: int, n_total: int, u: float, concentration: float,
                      strength: float, n_samples: int, master_seed: int,
                      cfg: ScfConfig = ScfConfig()) -> EntropyReport:
    """Disorder-averaged entropies at a single interaction value."""
    s_mean, s_std, l_mean, l_std = disorder_ensemble_scan(
        length, n_total, [u], concentration, strength, n_samples, master_seed, cfg
    )
    return EntropyReport(
        s_avg=float(s_mean[0]), l_avg=float(l_mean[0]),
        s_std=float(s_std[0]), l_std=float(l_std[0]),
    )
