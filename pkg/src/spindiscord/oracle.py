"""Brute-force reference implementations used by the test suite.

Nothing here shares code with the production paths.  Both chains are built
in the full spin basis, and discord is minimized over a dense angular grid of
explicit projectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import DomainError

MAX_CHAIN = 16

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class DenseChainResult:
    n_sites: int
    energy: float
    state: np.ndarray = field(repr=False)
    abs_mz: float
    correlators: dict  # separation -> (gxx, gyy, gzz)


def _xy_hamiltonian(gamma: float, lam: float, n_sites: int) -> sp.csr_matrix:
    """Periodic XY chain in the full 2^N basis; bit (N-1-i) of an index is site i, 1 = down."""
    dim = 1 << n_sites
    idx = np.arange(dim)
    s = [1 - 2 * ((idx >> (n_sites - 1 - i)) & 1) for i in range(n_sites)]
    diag = -sum(s).astype(float)
    rows, cols, vals = [idx], [idx], [diag]
    for i in range(n_sites):
        j = (i + 1) % n_sites
        flip = (1 << (n_sites - 1 - i)) | (1 << (n_sites - 1 - j))
        # (1+g) XX + (1-g) YY, with YY|s> = -s_i s_j |s'>
        amp = -0.5 * lam * ((1 + gamma) - (1 - gamma) * s[i] * s[j])
        rows.append(idx)
        cols.append(idx ^ flip)
        vals.append(amp)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(dim, dim))


def xy_finite_chain(gamma: float, lam: float, n_sites: int, separations) -> DenseChainResult:
    """Even-parity ground state of the periodic XY chain and its pair correlators."""
    if n_sites > MAX_CHAIN:
        raise DomainError(f"oracle chain limited to {MAX_CHAIN} sites")
    ham = _xy_hamiltonian(gamma, lam, n_sites)
    idx = np.arange(1 << n_sites)
    downs = sum((idx >> b) & 1 for b in range(n_sites))
    even = np.flatnonzero(downs % 2 == 0)
    block = ham[even][:, even]
    if block.shape[0] <= 512:
        w, v = np.linalg.eigh(block.toarray())
    else:
        w, v = eigsh(block, k=1, which="SA", tol=1e-13, v0=np.ones(block.shape[0]))
    psi = np.zeros(1 << n_sites)
    psi[even] = v[:, np.argmin(w)]
    psi /= np.linalg.norm(psi)

    def s_of(site):
        return 1 - 2 * ((idx >> (n_sites - 1 - site)) & 1)

    prob = psi ** 2
    s0 = s_of(0)
    mz = float(prob @ s0)
    corr = {}
    for n in separations:
        sn = s_of(n % n_sites)
        flipped = psi[idx ^ ((1 << (n_sites - 1)) | (1 << (n_sites - 1 - n % n_sites)))]
        gxx = float(psi @ flipped)
        gyy = float(psi @ (-(s0 * sn) * flipped))
        gzz = float(prob @ (s0 * sn))
        corr[int(n)] = (gxx, gyy, gzz)
    return DenseChainResult(n_sites, float(w.min()), psi, abs(mz), corr)


def xxz_dense_hamiltonian(n_sites: int, delta: float, h: float, j: float = 1.0) -> np.ndarray:
    """Open XXZ chain with boundary fields as a dense 2^N matrix (site 1 leftmost in kron)."""

    def op(single, site):
        return reduce(np.kron, [single if k == site else I2 for k in range(1, n_sites + 1)])

    # boundary term first so diagonal sums round identically to the sector builder
    ham = -h * (op(SZ, 1) - op(SZ, n_sites))
    for k in range(1, n_sites):
        ham -= 0.5 * j * (op(SX, k) @ op(SX, k + 1) + op(SY, k) @ op(SY, k + 1))
        ham -= 0.5 * delta * op(SZ, k) @ op(SZ, k + 1)
    return ham.real


def _entropy_bits(evals) -> float:
    e = np.clip(np.asarray(evals, dtype=float), 0.0, None)
    e = e[e > 0]
    return float(-(e * np.log2(e)).sum())


def brute_force_discord(rho, side: str = "b", n_theta: int = 720, n_phi: int = 1440,
                        with_parts: bool = False):
    """Discord from an exhaustive (theta, phi) grid of projective measurements, no refinement."""
    rho = np.asarray(rho, dtype=complex)
    if side == "a":
        swap = np.array([0, 2, 1, 3])
        rho = rho[np.ix_(swap, swap)]
    r4 = rho.reshape(2, 2, 2, 2)
    rho_a = np.einsum("ijkj->ik", r4)
    rho_b = np.einsum("ijil->jl", r4)
    s_a = _entropy_bits(np.linalg.eigvalsh(rho_a))
    s_b = _entropy_bits(np.linalg.eigvalsh(rho_b))
    s_ab = _entropy_bits(np.linalg.eigvalsh(rho))
    mutual = s_a + s_b - s_ab

    thetas = np.arange(n_theta) * np.pi / n_theta
    phis = np.arange(n_phi) * 2 * np.pi / n_phi
    # sigma[k, a, c] = sum_{j,d} rho[a j, c d] P_k[d, j] as one matrix product
    kernel = np.transpose(r4, (3, 1, 0, 2)).reshape(4, 4)
    best = np.inf
    for chunk in np.array_split(thetas, max(1, n_theta // 48)):
        th, ph = np.meshgrid(chunk, phis, indexing="ij")
        th, ph = th.ravel(), ph.ravel()
        # |psi> = cos(t/2)|u> + e^{i p} sin(t/2)|d>, projector and its complement
        c, s = np.cos(th / 2), np.sin(th / 2) * np.exp(1j * ph)
        proj = np.empty((th.size, 2, 2), dtype=complex)
        proj[:, 0, 0] = c * c
        proj[:, 0, 1] = c * np.conj(s)
        proj[:, 1, 0] = s * c
        proj[:, 1, 1] = np.abs(s) ** 2
        cond_ent = np.zeros(th.size)
        for p in (proj, I2[None] - proj):
            sigma = (p.reshape(-1, 4) @ kernel).reshape(-1, 2, 2)
            prob = np.real(sigma[:, 0, 0] + sigma[:, 1, 1])
            half_diff = np.real(sigma[:, 0, 0] - sigma[:, 1, 1]) / 2
            rad = np.sqrt(half_diff ** 2 + np.abs(sigma[:, 0, 1]) ** 2)
            for ev in (prob / 2 + rad, prob / 2 - rad):
                with np.errstate(divide="ignore", invalid="ignore"):
                    x = np.where(prob > 1e-14, ev / prob, 0.0)
                    term = np.where(x > 0, -x * np.log2(np.where(x > 0, x, 1.0)), 0.0)
                cond_ent += np.where(prob > 1e-14, prob * term, 0.0)
        best = min(best, float(cond_ent.min()))
    classical = s_a - best
    discord = mutual - classical
    if with_parts:
        return discord, mutual, classical
    return discord
