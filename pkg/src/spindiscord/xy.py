"""Thermodynamic-limit XY chain in a transverse field.

Exact integrals and Toeplitz-determinant correlators of the infinite chain,
assembled into the two-site reduced state of spins 0 and n.
The magnetization follows the integral's sign convention (mz = -1 at lambda=0).
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .discord import CorrelationReport, XStateDensity, quantum_discord
from .errors import ConsistencyError, DomainError, PreconditionError, QuadratureError
from .profile import DecayProfile

__all__ = [
    "XYParams",
    "GTable",
    "PairObservables",
    "dispersion",
    "magnetization",
    "g_coefficient",
    "g_table",
    "xx_correlator",
    "yy_correlator",
    "zz_correlator",
    "pair_observables",
    "build_pair_state",
    "pair_discord",
    "discord_profile",
    "clear_cache",
]

DEFAULT_TOL = 1e-10
SUBDIVISION_LIMIT = 10_000
# panel boundary where the dispersion vanishes at lambda=1
CRITICAL_BREAK = math.pi - 1e-6


@dataclass(frozen=True)
class XYParams:
    """Chain parameters; ``beta=None`` means T -> 0."""

    gamma: float
    lam: float
    beta: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise DomainError(f"gamma={self.gamma} outside [0, 1]")
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda={self.lam} must be finite and >= 0")
        if self.beta is not None and not (self.beta > 0.0):
            raise DomainError(f"beta={self.beta} must be > 0 (use None for T -> 0)")

    @property
    def zero_temperature(self) -> bool:
        return self.beta is None


def dispersion(phi: float, params: XYParams) -> float:
    """Quasi-particle energy omega(phi) on [0, pi]."""
    g, lam = params.gamma, params.lam
    return 0.5 * math.hypot(g * lam * math.sin(phi), 1.0 + lam * math.cos(phi))


def _weight(phi: float, params: XYParams) -> float:
    """tanh(beta w) / (2 pi w), zero where w vanishes (a null set)."""
    w = dispersion(phi, params)
    if w == 0.0:
        return 0.0
    t = 1.0 if params.beta is None else math.tanh(params.beta * w)
    return t / (2.0 * math.pi * w)


def _breakpoints(params: XYParams) -> list[float]:
    pts = [CRITICAL_BREAK]
    if params.gamma == 0.0 and params.lam > 1.0:
        # XX limit: the integrand jumps where 1 + lam cos(phi) changes sign
        pts.append(math.acos(-1.0 / params.lam))
    return sorted(pts)


def _integrate(f, params: XYParams, tol: float) -> tuple[float, float]:
    # full_output silences QUADPACK warnings; the error estimate is checked instead
    val, err, *_ = quad(f, 0.0, math.pi, epsabs=tol, epsrel=0.0,
                        limit=SUBDIVISION_LIMIT, points=_breakpoints(params), full_output=1)
    if err > tol:
        raise QuadratureError(
            f"quadrature did not reach {tol:g} for {params} (estimate {err:.3e})", err)
    return val, err


def _mz_integrand(params: XYParams):
    lam = params.lam
    return lambda phi: -(1.0 + lam * math.cos(phi)) * _weight(phi, params)


def _g_integrand(n: int, params: XYParams):
    g, lam = params.gamma, params.lam

    def f(phi):
        bracket = math.cos(n * phi) * (1.0 + lam * math.cos(phi)) - g * lam * math.sin(n * phi) * math.sin(phi)
        return bracket * _weight(phi, params)

    return f


class _Cache:
    """Per-(params, tol) memo of integrals; inserts are serialized."""

    def __init__(self):
        self._lock = threading.Lock()
        self._mz: dict = {}
        self._g: dict = {}

    def magnetization(self, params, tol):
        key = (params, tol)
        hit = self._mz.get(key)
        if hit is None:
            hit = _integrate(_mz_integrand(params), params, tol)
            with self._lock:
                self._mz.setdefault(key, hit)
        return hit

    def g(self, n, params, tol):
        bucket = self._g.get((params, tol))
        if bucket is None:
            with self._lock:
                bucket = self._g.setdefault((params, tol), {})
        hit = bucket.get(n)
        if hit is None:
            hit = _integrate(_g_integrand(n, params), params, tol)
            with self._lock:
                bucket.setdefault(n, hit)
        return hit

    def clear(self):
        with self._lock:
            self._mz.clear()
            self._g.clear()


_CACHE = _Cache()


def clear_cache() -> None:
    _CACHE.clear()


def magnetization(params: XYParams, tol: float = DEFAULT_TOL, with_error: bool = False):
    """Transverse magnetization density <sigma_z> (value, or (value, error estimate))."""
    val, err = _CACHE.magnetization(params, tol)
    return (val, err) if with_error else val


def g_coefficient(n: int, params: XYParams, tol: float = DEFAULT_TOL, with_error: bool = False):
    """The integral G_n; any integer index."""
    val, err = _CACHE.g(int(n), params, tol)
    return (val, err) if with_error else val


@dataclass(frozen=True)
class GTable:
    """Contiguous block of G_k values, ``k_min <= k <= k_max``."""

    params: XYParams
    values: dict[int, float]
    errors: dict[int, float] = field(default_factory=dict, repr=False)
    tol: float = DEFAULT_TOL

    @property
    def k_min(self) -> int:
        return min(self.values)

    @property
    def k_max(self) -> int:
        return max(self.values)

    def __getitem__(self, k: int) -> float:
        try:
            return self.values[k]
        except KeyError:
            raise PreconditionError(f"G table lacks index {k} (covers [{self.k_min}, {self.k_max}])") from None

    def require(self, lo: int, hi: int) -> None:
        if lo < self.k_min or hi > self.k_max:
            raise PreconditionError(
                f"G table covers [{self.k_min}, {self.k_max}], need [{lo}, {hi}]")


def g_table(params: XYParams, k_min: int, k_max: int, tol: float = DEFAULT_TOL) -> GTable:
    if k_max < k_min:
        raise PreconditionError("empty G range")
    vals, errs = {}, {}
    for k in range(k_min, k_max + 1):
        vals[k], errs[k] = g_coefficient(k, params, tol, with_error=True)
    return GTable(params, vals, errs, tol)


def _toeplitz_det(table: GTable, n: int, shift: int) -> float:
    if n == 1:
        return table[shift]
    idx = np.arange(n)[:, None] - np.arange(n)[None, :] + shift
    mat = np.vectorize(table.__getitem__, otypes=[float])(idx)
    return float(np.linalg.det(mat))


def xx_correlator(n: int, table: GTable) -> float:
    """<s0x snx> as the n x n Toeplitz determinant with entries G_{i-j-1}."""
    if n < 1:
        raise PreconditionError("separation must be >= 1")
    table.require(-n, n - 2)
    return _toeplitz_det(table, n, -1)


def yy_correlator(n: int, table: GTable) -> float:
    """<s0y sny> as the n x n Toeplitz determinant with entries G_{i-j+1}."""
    if n < 1:
        raise PreconditionError("separation must be >= 1")
    table.require(-n + 2, n)
    return _toeplitz_det(table, n, 1)


def zz_correlator(n: int, params: XYParams, table: GTable) -> float:
    mz = magnetization(params, table.tol)
    return mz * mz - table[n] * table[-n]


@dataclass(frozen=True)
class PairObservables:
    mz: float
    gxx: float
    gyy: float
    gzz: float
    n: int


def pair_observables(n: int, params: XYParams, tol: float = DEFAULT_TOL,
                     table: GTable | None = None) -> PairObservables:
    if n < 1:
        raise PreconditionError("separation must be >= 1")
    if table is None:
        table = g_table(params, -n - 1, n + 1, tol)
    return PairObservables(
        mz=magnetization(params, table.tol),
        gxx=xx_correlator(n, table),
        gyy=yy_correlator(n, table),
        gzz=zz_correlator(n, params, table),
        n=n,
    )


def build_pair_state(n: int, params: XYParams, tol: float = DEFAULT_TOL,
                     table: GTable | None = None) -> XStateDensity:
    """Reduced density operator of spins 0 and n."""
    obs = pair_observables(n, params, tol, table)
    try:
        return XStateDensity.from_observables(obs.mz, obs.gxx, obs.gyy, obs.gzz)
    except DomainError as exc:
        raise ConsistencyError(f"pair state at n={n}, {params} is not a density operator: {exc}") from exc


def pair_discord(n: int, params: XYParams, tol: float = DEFAULT_TOL,
                 method: str = "auto", table: GTable | None = None) -> tuple[PairObservables, CorrelationReport]:
    """Observables and discord of the (0, n) pair.

    ``method="auto"`` uses the {|+>, |->} closed form whenever |gxx| >= |gyy|
    and falls back to the measurement optimizer otherwise.
    """
    obs = pair_observables(n, params, tol, table)
    try:
        rho = XStateDensity.from_observables(obs.mz, obs.gxx, obs.gyy, obs.gzz)
    except DomainError as exc:
        raise ConsistencyError(f"pair state at n={n}, {params} is not a density operator: {exc}") from exc
    if method == "auto":
        method = "closed_form" if abs(obs.gxx) >= abs(obs.gyy) else "optimized"
    return obs, quantum_discord(rho, method)


def discord_profile(params: XYParams, n_max: int, tol: float = DEFAULT_TOL,
                    method: str = "auto") -> DecayProfile:
    """Discord of pairs (0, n) for n = 1..n_max."""
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    table = g_table(params, -n_max - 1, n_max + 1, tol)
    qs = [pair_discord(n, params, tol, method, table)[1].discord for n in range(1, n_max + 1)]
    return DecayProfile(tuple(range(1, n_max + 1)), tuple(qs),
                        {"model": "xy", "gamma": params.gamma, "lambda": params.lam,
                         "beta": params.beta, "tol": tol, "method": method})
