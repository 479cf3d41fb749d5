"""Open XXZ chain with opposite boundary fields, solved sector by sector.

Site ``k`` (1-based) is stored in bit ``N - k`` of a configuration integer and
a set bit means spin down, so integer order coincides with the tensor-product
order of ``kron(site_1, ..., site_N)`` in the {up, down} basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .discord import XStateDensity, quantum_discord
from .errors import ConsistencyError, ConvergenceError, DomainError, PreconditionError
from .profile import DecayProfile

__all__ = [
    "XXZSystem",
    "SectorBasis",
    "GroundStateResult",
    "sector_basis",
    "build_sector_hamiltonian",
    "lanczos_ground",
    "ground_state",
    "critical_field",
    "pair_reduced_density",
    "discord_profile",
    "default_n_max",
]

MAX_SITES = 24
RESIDUAL_TOL = 1e-10
MAX_ITER = 1000
DEGENERACY_TOL = 1e-9
KRYLOV_DIM = 120
KRYLOV_BYTES = 4e8
X_FORM_TOL = 1e-12


@dataclass(frozen=True)
class XXZSystem:
    n_sites: int
    delta: float
    h_field: float
    j_exchange: float = 1.0
    max_sites: int = MAX_SITES

    def __post_init__(self):
        if not (2 <= self.n_sites <= self.max_sites):
            raise DomainError(f"n_sites={self.n_sites} outside [2, {self.max_sites}]")
        if self.h_field < 0:
            raise DomainError(f"boundary field must be >= 0, got {self.h_field}")
        if self.j_exchange <= 0:
            raise DomainError("exchange coupling must be positive")


@dataclass(frozen=True)
class SectorBasis:
    n_sites: int
    n_down: int
    states: np.ndarray = field(repr=False)

    @property
    def sz_total(self) -> int:
        return self.n_sites - 2 * self.n_down

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, config) -> np.ndarray:
        """Ordinal of each configuration (``-1`` if absent)."""
        config = np.asarray(config, dtype=np.int64)
        pos = np.searchsorted(self.states, config)
        pos_c = np.minimum(pos, self.dim - 1)
        return np.where(self.states[pos_c] == config, pos_c, -1)


@lru_cache(maxsize=4)
def _popcounts(n_sites: int) -> np.ndarray:
    configs = np.arange(1 << n_sites, dtype=np.int64)
    counts = np.zeros_like(configs)
    for b in range(n_sites):
        counts += (configs >> b) & 1
    return counts


def sector_basis(n_sites: int, sz_total: int) -> SectorBasis:
    if (n_sites - sz_total) % 2 or abs(sz_total) > n_sites:
        raise DomainError(f"no sector with Sz={sz_total} for N={n_sites}")
    n_down = (n_sites - sz_total) // 2
    states = np.flatnonzero(_popcounts(n_sites) == n_down).astype(np.int64)
    return SectorBasis(n_sites, n_down, states)


def _spins(states: np.ndarray, n_sites: int, site: int) -> np.ndarray:
    return 1 - 2 * ((states >> (n_sites - site)) & 1)


def build_sector_hamiltonian(sys: XXZSystem, sector: SectorBasis) -> sp.csr_matrix:
    """CSR block of the Hamiltonian restricted to one magnetization sector."""
    n, st = sys.n_sites, sector.states
    spins = [None] + [_spins(st, n, k) for k in range(1, n + 1)]
    diag = -sys.h_field * (spins[1] - spins[n]).astype(float)
    rows, cols, vals = [np.arange(sector.dim)], [np.arange(sector.dim)], []
    for k in range(1, n):
        diag = diag - 0.5 * sys.delta * spins[k] * spins[k + 1]
    vals.append(diag)
    for k in range(1, n):
        hop = np.flatnonzero(spins[k] != spins[k + 1])
        mask = (1 << (n - k)) | (1 << (n - k - 1))
        rows.append(hop)
        cols.append(sector.index(st[hop] ^ mask))
        vals.append(np.full(hop.size, -sys.j_exchange))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(sector.dim, sector.dim))


def lanczos_ground(matrix, v0: np.ndarray, tol: float = RESIDUAL_TOL, max_iter: int = MAX_ITER,
                   krylov_dim: int | None = None) -> tuple[float, np.ndarray, float, int]:
    """Lowest eigenpair of a real symmetric operator.

    Restarted Lanczos with full (double) reorthogonalization; each cycle
    restarts from the current Ritz vector.  Returns ``(energy, vector,
    residual_norm, matvecs)``.
    """
    dim = v0.size
    if krylov_dim is None:
        krylov_dim = max(8, min(KRYLOV_DIM, int(KRYLOV_BYTES / (8 * dim))))
    m = min(krylov_dim, dim)
    v = v0 / np.linalg.norm(v0)
    matvecs, best = 0, (math.inf, v, math.inf)
    while True:
        basis = np.zeros((m, dim))
        alphas, betas = [], []
        basis[0] = v
        for k in range(m):
            w = matrix @ basis[k]
            matvecs += 1
            alphas.append(float(basis[k] @ w))
            for _ in range(2):
                w -= basis[: k + 1].T @ (basis[: k + 1] @ w)
            beta = float(np.linalg.norm(w))
            if k == m - 1 or beta <= 1e-14 * max(1.0, abs(alphas[0])) or matvecs >= max_iter:
                break
            betas.append(beta)
            basis[k + 1] = w / beta
        size = len(alphas)
        if size == 1:
            theta, s = np.array([alphas[0]]), np.ones((1, 1))
        else:
            theta, s = eigh_tridiagonal(np.array(alphas), np.array(betas[: size - 1]),
                                        select="i", select_range=(0, 0))
        v = s[:, 0] @ basis[:size]
        v /= np.linalg.norm(v)
        hv = matrix @ v
        matvecs += 1
        energy = float(v @ hv)
        resid = float(np.linalg.norm(hv - energy * v))
        if resid < best[2]:
            best = (energy, v, resid)
        if resid <= tol:
            return energy, v, resid, matvecs
        if matvecs >= max_iter:
            raise ConvergenceError(
                f"Lanczos stopped after {matvecs} matvecs with residual {best[2]:.3e}", best[2])


@dataclass(frozen=True)
class GroundStateResult:
    system: XXZSystem
    energy: float
    sector: int
    basis: SectorBasis = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    residual_norm: float
    degeneracy: tuple[tuple[int, float], ...]
    sector_energies: dict = field(repr=False, default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return len(self.degeneracy) > 1

    def full_vector(self) -> np.ndarray:
        psi = np.zeros(1 << self.system.n_sites)
        psi[self.basis.states] = self.amplitudes
        return psi


def ground_state(sys: XXZSystem, tol: float = RESIDUAL_TOL, max_iter: int = MAX_ITER,
                 degeneracy_tol: float = DEGENERACY_TOL) -> GroundStateResult:
    """Scan every magnetization sector and return the lowest state.

    Ties within ``degeneracy_tol`` (relative) are broken by smaller |Sz|, then
    smaller Sz, and all tied sectors are listed in ``degeneracy``.
    """
    found = {}
    for n_down in range(sys.n_sites + 1):
        sz = sys.n_sites - 2 * n_down
        basis = sector_basis(sys.n_sites, sz)
        ham = build_sector_hamiltonian(sys, basis)
        # uniform positive start: overlaps the Perron ground vector of each sector
        v0 = np.ones(basis.dim)
        energy, vec, resid, _ = lanczos_ground(ham, v0, tol, max_iter)
        if vec.sum() < 0:
            vec = -vec
        found[sz] = (energy, vec, resid, basis)
    e_min = min(e for e, *_ in found.values())
    scale = max(1.0, abs(e_min))
    tied = sorted((sz for sz, (e, *_) in found.items() if abs(e - e_min) <= degeneracy_tol * scale),
                  key=lambda sz: (abs(sz), sz))
    pick = tied[0]
    energy, vec, resid, basis = found[pick]
    return GroundStateResult(
        system=sys,
        energy=energy,
        sector=pick,
        basis=basis,
        amplitudes=vec,
        residual_norm=resid,
        degeneracy=tuple((sz, found[sz][0]) for sz in tied),
        sector_energies={sz: v[0] for sz, v in sorted(found.items())},
    )


def critical_field(delta: float) -> float:
    """Boundary field separating the ferromagnetic and kink phases (delta >= 1)."""
    if not delta >= 1.0:
        raise DomainError(f"critical field defined for delta >= 1, got {delta}")
    return 0.5 * math.sqrt(delta * delta - 1.0)


def _pair_matrix(psi: np.ndarray, n_sites: int, site_i: int, site_j: int) -> np.ndarray:
    t = np.moveaxis(psi.reshape((2,) * n_sites), (site_i - 1, site_j - 1), (0, 1)).reshape(4, -1)
    return t @ t.T


def pair_reduced_density(gs: GroundStateResult, site_i: int, site_j: int) -> XStateDensity:
    """Two-site reduced state of the ground state (sites are 1-based)."""
    n = gs.system.n_sites
    if not (1 <= site_i < site_j <= n):
        raise PreconditionError(f"need 1 <= i < j <= {n}, got ({site_i}, {site_j})")
    rho = _pair_matrix(gs.full_vector(), n, site_i, site_j)
    if abs(np.trace(rho) - 1.0) > X_FORM_TOL:
        raise ConsistencyError(f"reduced state has trace {np.trace(rho)}")
    return XStateDensity.from_matrix(rho, tol=X_FORM_TOL)


def default_n_max(n_sites: int) -> int:
    return min(9, n_sites - n_sites // 2 - 1)


def discord_profile(sys: XXZSystem, n_max: int | None = None, side: str = "b",
                    gs: GroundStateResult | None = None) -> DecayProfile:
    """Discord of pairs (N/2, N/2 + n), n = 1..n_max, measured on ``side``."""
    half = sys.n_sites // 2
    if n_max is None:
        n_max = default_n_max(sys.n_sites)
    if not (1 <= n_max <= sys.n_sites - half):
        raise PreconditionError(f"n_max={n_max} outside [1, {sys.n_sites - half}]")
    if gs is None:
        gs = ground_state(sys)
    qs = [quantum_discord(pair_reduced_density(gs, half, half + n), "optimized", side).discord
          for n in range(1, n_max + 1)]
    return DecayProfile(tuple(range(1, n_max + 1)), tuple(qs), {
        "model": "xxz", "n_sites": sys.n_sites, "delta": sys.delta, "h": sys.h_field,
        "side": side, "energy": gs.energy, "sector": gs.sector, "degenerate": gs.degenerate,
        "residual": gs.residual_norm,
    })
