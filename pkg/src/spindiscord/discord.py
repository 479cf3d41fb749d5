"""Quantum discord of two-qubit states and the entropies it is built from.

States live in the computational basis ``{uu, ud, du, dd}`` where ``u`` is the
+1 eigenvector of sigma_z.  Measurements are projective and parametrized by a
Bloch direction on the measured qubit.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import entr

from .errors import ConsistencyError, DomainError, PreconditionError

__all__ = [
    "XStateDensity",
    "Measurement",
    "CorrelationReport",
    "ClosedFormCorrelation",
    "binary_entropy",
    "von_neumann_entropy",
    "pair_spectrum",
    "mutual_information",
    "conditional_entropy_after",
    "classical_correlation_closed_form",
    "classical_correlation_optimized",
    "quantum_discord",
    "correlation_tensor",
]

STATE_TOL = 1e-12
NEG_EIG_TOL = 1e-12
OUTCOME_CUTOFF = 1e-14
DISCORD_TOL = 1e-9

_LN2 = math.log(2.0)

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class XStateDensity:
    """Two-qubit density operator of X form with real coherences.

    ``c_outer`` couples uu and dd, ``c_inner`` couples ud and du.
    """

    p_uu: float
    p_ud: float
    p_du: float
    p_dd: float
    c_outer: float = 0.0
    c_inner: float = 0.0

    def __post_init__(self):
        pops = (self.p_uu, self.p_ud, self.p_du, self.p_dd)
        if min(pops) < -STATE_TOL:
            raise DomainError(f"negative population in X state: {pops}")
        if abs(sum(pops) - 1.0) > STATE_TOL:
            raise DomainError(f"populations sum to {sum(pops)!r}, expected 1")
        if abs(self.c_outer) > math.sqrt(max(self.p_uu, 0.0) * max(self.p_dd, 0.0)) + STATE_TOL:
            raise DomainError("outer coherence violates positivity")
        if abs(self.c_inner) > math.sqrt(max(self.p_ud, 0.0) * max(self.p_du, 0.0)) + STATE_TOL:
            raise DomainError("inner coherence violates positivity")

    @classmethod
    def from_observables(cls, mz: float, gxx: float, gyy: float, gzz: float) -> "XStateDensity":
        """Symmetric X state ``(I + mz(Z1 + Z2) + sum_i g_ii S_i S_i) / 4``."""
        return cls(
            p_uu=(1.0 + 2.0 * mz + gzz) / 4.0,
            p_ud=(1.0 - gzz) / 4.0,
            p_du=(1.0 - gzz) / 4.0,
            p_dd=(1.0 - 2.0 * mz + gzz) / 4.0,
            c_outer=(gxx - gyy) / 4.0,
            c_inner=(gxx + gyy) / 4.0,
        )

    @classmethod
    def from_matrix(cls, rho, tol: float = STATE_TOL) -> "XStateDensity":
        """Project a 4x4 matrix onto X form after checking that nothing is lost."""
        rho = np.asarray(rho)
        if rho.shape != (4, 4):
            raise PreconditionError(f"expected a 4x4 matrix, got shape {rho.shape}")
        mask = np.zeros((4, 4), dtype=bool)
        mask[np.arange(4), np.arange(4)] = True
        mask[np.arange(4), 3 - np.arange(4)] = True
        off = np.abs(rho[~mask]).max()
        if off > tol:
            raise ConsistencyError(f"matrix is not X-shaped (max off-X entry {off:.3e})")
        imag = max(abs(rho[0, 3].imag), abs(rho[1, 2].imag), np.abs(np.diag(rho).imag).max())
        if imag > tol:
            raise ConsistencyError(f"X state has complex coherences ({imag:.3e})")
        d = np.real(np.diag(rho))
        return cls(float(d[0]), float(d[1]), float(d[2]), float(d[3]),
                   float(rho[0, 3].real), float(rho[1, 2].real))

    def to_matrix(self) -> np.ndarray:
        rho = np.diag([self.p_uu, self.p_ud, self.p_du, self.p_dd]).astype(float)
        rho[0, 3] = rho[3, 0] = self.c_outer
        rho[1, 2] = rho[2, 1] = self.c_inner
        return rho

    @property
    def mz_a(self) -> float:
        return self.p_uu + self.p_ud - self.p_du - self.p_dd

    @property
    def mz_b(self) -> float:
        return self.p_uu - self.p_ud + self.p_du - self.p_dd

    @property
    def is_symmetric(self) -> bool:
        return abs(self.p_ud - self.p_du) <= STATE_TOL

    def observables(self) -> tuple[float, float, float, float]:
        """Return ``(mz, gxx, gyy, gzz)``; ``mz`` is the mean of both local values."""
        gxx = 2.0 * (self.c_outer + self.c_inner)
        gyy = 2.0 * (self.c_inner - self.c_outer)
        gzz = self.p_uu + self.p_dd - self.p_ud - self.p_du
        return 0.5 * (self.mz_a + self.mz_b), gxx, gyy, gzz

    def spectrum(self) -> np.ndarray:
        """Eigenvalues from the two 2x2 blocks, ordered (outer+, outer-, inner+, inner-)."""
        out = []
        for a, d, c in ((self.p_uu, self.p_dd, self.c_outer), (self.p_ud, self.p_du, self.c_inner)):
            mean = 0.5 * (a + d)
            rad = math.hypot(0.5 * (a - d), c)
            out += [mean + rad, mean - rad]
        return np.array(out)

    def spin_flipped(self) -> "XStateDensity":
        """Image under sigma_x on both qubits (sigma_z -> -sigma_z globally)."""
        return XStateDensity(self.p_dd, self.p_du, self.p_ud, self.p_uu, self.c_outer, self.c_inner)

    def swapped(self) -> "XStateDensity":
        """Exchange the roles of the two qubits."""
        return XStateDensity(self.p_uu, self.p_du, self.p_ud, self.p_dd, self.c_outer, self.c_inner)


@dataclass(frozen=True)
class Measurement:
    """Projective measurement {P+, P-} along the Bloch direction (theta, phi_az)."""

    theta: float = 0.5 * math.pi
    phi_az: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise DomainError(f"theta={self.theta} outside [0, pi]")
        if not (0.0 <= self.phi_az < 2.0 * math.pi):
            raise DomainError(f"phi_az={self.phi_az} outside [0, 2pi)")

    @classmethod
    def from_direction(cls, n) -> "Measurement":
        x, y, z = np.asarray(n, dtype=float) / np.linalg.norm(n)
        theta = math.acos(min(1.0, max(-1.0, z)))
        phi = math.atan2(y, x) % (2.0 * math.pi)
        if phi >= 2.0 * math.pi:
            phi = 0.0
        return cls(theta, phi)

    @property
    def direction(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi_az), st * math.sin(self.phi_az), math.cos(self.theta)])

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        n_sigma = sum(c * s for c, s in zip(self.direction, PAULI[1:]))
        return 0.5 * (PAULI[0] + n_sigma), 0.5 * (PAULI[0] - n_sigma)


@dataclass(frozen=True)
class CorrelationReport:
    mutual_info: float
    classical_corr: float
    discord: float
    minimizing_measurement: Measurement
    method: str

    def to_dict(self) -> dict:
        return asdict(self)


class ClosedFormCorrelation(NamedTuple):
    classical_corr: float
    p1: float
    p2: float


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, XStateDensity):
        return rho.to_matrix()
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise PreconditionError(f"expected a two-qubit density operator, got shape {rho.shape}")
    return rho


def _h2(x):
    return (entr(x) + entr(1.0 - x)) / _LN2


def binary_entropy(x: float) -> float:
    """Shannon entropy in bits of a Bernoulli(x) variable."""
    if x < -STATE_TOL or x > 1.0 + STATE_TOL:
        raise DomainError(f"binary_entropy argument {x} outside [0, 1]")
    return float(_h2(min(1.0, max(0.0, x))))


def _entropy_of_spectrum(evals) -> float:
    evals = np.asarray(evals, dtype=float)
    if evals.min() < -NEG_EIG_TOL:
        raise DomainError(f"density operator has negative eigenvalue {evals.min():.3e}")
    return float(entr(np.clip(evals, 0.0, None)).sum() / _LN2)


def von_neumann_entropy(rho) -> float:
    """Entropy in bits.

    Accepts an :class:`XStateDensity`, a square density matrix or an already
    computed 1-D eigenvalue spectrum.
    """
    if isinstance(rho, XStateDensity):
        return _entropy_of_spectrum(rho.spectrum())
    arr = np.asarray(rho)
    if arr.ndim == 1:
        return _entropy_of_spectrum(arr)
    return _entropy_of_spectrum(np.linalg.eigvalsh(0.5 * (arr + arr.conj().T)))


def pair_spectrum(rho: XStateDensity) -> np.ndarray:
    """Closed-form eigenvalues ``[xi0, xi1, eta0, eta1]`` of a symmetric X state."""
    if not rho.is_symmetric:
        raise PreconditionError("pair_spectrum requires equal local magnetizations; "
                                "use von_neumann_entropy on the matrix instead")
    mz, gxx, gyy, gzz = rho.observables()
    root = math.sqrt((gxx - gyy) ** 2 + 4.0 * mz * mz)
    return np.array([
        (1.0 + gzz + root) / 4.0,
        (1.0 + gzz - root) / 4.0,
        (1.0 - gzz + gxx + gyy) / 4.0,
        (1.0 - gzz - gxx - gyy) / 4.0,
    ])


def _marginals(rho) -> tuple[np.ndarray, np.ndarray]:
    m = _as_matrix(rho).reshape(2, 2, 2, 2)
    return np.einsum("ijkj->ik", m), np.einsum("ijil->jl", m)


def mutual_information(rho) -> float:
    """Quantum mutual information S(a) + S(b) - S(ab) in bits."""
    if isinstance(rho, XStateDensity):
        s_a = binary_entropy(0.5 * (1.0 + rho.mz_a))
        s_b = binary_entropy(0.5 * (1.0 + rho.mz_b))
    else:
        rho_a, rho_b = _marginals(rho)
        s_a, s_b = von_neumann_entropy(rho_a), von_neumann_entropy(rho_b)
    return max(0.0, s_a + s_b - von_neumann_entropy(rho))


def correlation_tensor(rho) -> np.ndarray:
    """Real 4x4 array ``R[i, j] = tr(rho S_i x S_j)`` with S_0 = identity."""
    if isinstance(rho, XStateDensity):
        r = np.zeros((4, 4))
        r[0, 0] = 1.0
        r[3, 0] = rho.mz_a
        r[0, 3] = rho.mz_b
        r[1, 1] = 2.0 * (rho.c_outer + rho.c_inner)
        r[2, 2] = 2.0 * (rho.c_inner - rho.c_outer)
        r[3, 3] = rho.p_uu + rho.p_dd - rho.p_ud - rho.p_du
        return r
    m = _as_matrix(rho)
    return np.array([[np.real(np.trace(m @ np.kron(si, sj))) for sj in PAULI] for si in PAULI])


def _directions(theta, phi) -> np.ndarray:
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _conditional_entropy_dirs(r: np.ndarray, n: np.ndarray, side: str) -> np.ndarray:
    """Vectorized S(unmeasured | measurement along each direction in ``n``)."""
    if side == "a":
        r = r.T
    elif side != "b":
        raise PreconditionError(f"side must be 'a' or 'b', got {side!r}")
    a_vec, b_vec, t = r[1:, 0], r[0, 1:], r[1:, 1:]
    bn = n @ b_vec
    tn = n @ t.T
    total = np.zeros(bn.shape)
    for sign in (1.0, -1.0):
        p = 0.5 * (1.0 + sign * bn)
        r_len = np.linalg.norm(a_vec + sign * tn, axis=-1)
        live = p >= OUTCOME_CUTOFF
        ratio = np.where(live, r_len / np.where(live, 1.0 + sign * bn, 1.0), 0.0)
        total += np.where(live, p * _h2(0.5 * (1.0 + np.clip(ratio, 0.0, 1.0))), 0.0)
    return total


def conditional_entropy_after(rho, m: Measurement, side: str = "b") -> float:
    """Average entropy of the unmeasured qubit after measuring ``side`` with ``m``."""
    r = correlation_tensor(rho)
    return float(_conditional_entropy_dirs(r, m.direction[None, :], side)[0])


def _unmeasured_entropy(rho, side: str) -> float:
    if isinstance(rho, XStateDensity):
        mz = rho.mz_a if side == "b" else rho.mz_b
        return binary_entropy(0.5 * (1.0 + mz))
    rho_a, rho_b = _marginals(rho)
    return von_neumann_entropy(rho_a if side == "b" else rho_b)


def classical_correlation_closed_form(rho: XStateDensity) -> ClosedFormCorrelation:
    """Classical correlation of a symmetric X state measured in the {|+>, |->} basis.

    Valid when ``|gxx| >= |gyy|``; J = H(p1) - H(p2).
    """
    if not rho.is_symmetric:
        raise PreconditionError("closed form needs equal local magnetizations; use the optimizer")
    mz, gxx, gyy, _ = rho.observables()
    if abs(gxx) < abs(gyy) - STATE_TOL:
        raise PreconditionError(
            f"|gxx|={abs(gxx):.6g} < |gyy|={abs(gyy):.6g}: closed form invalid, use the optimizer")
    p1 = 0.5 * (1.0 + mz)
    p2 = 0.5 * (1.0 + min(1.0, math.hypot(gxx, mz)))
    return ClosedFormCorrelation(binary_entropy(p1) - binary_entropy(p2), p1, p2)


GRID_THETA = 64
GRID_PHI = 128
REFINE_STARTS = 3
ANGLE_RESOLUTION = 1e-6


def _pattern_search(f, theta: float, phi: float, step: float) -> tuple[float, float, float]:
    best = f(theta, phi)
    while step >= ANGLE_RESOLUTION:
        moved = False
        for dt, dp in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            val = f(theta + dt, phi + dp)
            if val < best:
                best, theta, phi, moved = val, theta + dt, phi + dp, True
                break
        if not moved:
            step *= 0.5
    return best, theta, phi


def classical_correlation_optimized(rho, side: str = "b") -> tuple[float, Measurement]:
    """Classical correlation maximized over projective measurements on ``side``.

    A fixed 64x128 angular grid (containing the x direction) seeds a compass
    search refined down to 1e-6 rad.  Fully deterministic.
    """
    r = correlation_tensor(rho)
    thetas = np.arange(GRID_THETA) * (math.pi / GRID_THETA)
    phis = np.arange(GRID_PHI) * (2.0 * math.pi / GRID_PHI)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    grid = _conditional_entropy_dirs(r, _directions(tt, pp), side).ravel()

    def f(theta, phi):
        return float(_conditional_entropy_dirs(r, _directions(theta, phi)[None, :], side)[0])

    best = (float(grid.min()), float(tt.ravel()[grid.argmin()]), float(pp.ravel()[grid.argmin()]))
    for idx in np.argsort(grid, kind="stable")[:REFINE_STARTS]:
        cand = _pattern_search(f, float(tt.ravel()[idx]), float(pp.ravel()[idx]), math.pi / GRID_THETA)
        if cand[0] < best[0]:
            best = cand
    _, theta, phi = best
    s_unmeasured = _unmeasured_entropy(rho, side)
    return s_unmeasured - best[0], Measurement.from_direction(_directions(theta, phi))


def quantum_discord(rho, method: str = "optimized", side: str = "b") -> CorrelationReport:
    """Discord Q = I - J with J from the closed form or the measurement optimizer."""
    mi = mutual_information(rho)
    if method == "closed_form":
        if side != "b" and not (isinstance(rho, XStateDensity) and rho.is_symmetric):
            raise PreconditionError("closed form is defined for symmetric states only")
        if not isinstance(rho, XStateDensity):
            rho = XStateDensity.from_matrix(rho)
        j = classical_correlation_closed_form(rho).classical_corr
        meas = Measurement(0.5 * math.pi, 0.0)
    elif method == "optimized":
        j, meas = classical_correlation_optimized(rho, side)
    else:
        raise PreconditionError(f"unknown method {method!r}")
    if j < -DISCORD_TOL:
        raise ConsistencyError(f"negative classical correlation {j:.3e}")
    j = max(j, 0.0)
    q = mi - j
    if q < -DISCORD_TOL:
        raise ConsistencyError(f"negative discord {q:.3e} (I={mi}, J={j})")
    return CorrelationReport(mi, j, max(q, 0.0), meas, method)
