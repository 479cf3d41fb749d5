"""Decay-law fits of discord profiles and the range-ratio diagnostic."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .profile import DecayProfile

__all__ = [
    "FitResult",
    "ModelSelection",
    "HeatmapGrid",
    "UndefinedRatioError",
    "fit_exponential",
    "fit_power_law",
    "select_model",
    "corrected_aic",
    "range_ratio",
    "heatmap_scan",
]

START_RATES = (0.1, 0.5, 1.0, 2.0)
N_PARAMS = 3
MIN_SAMPLES = N_PARAMS + 1
MAX_ITER = 500
REL_SSE_TOL = 1e-12
GRAD_TOL = 1e-10
AIC_TIE = 1e-6
RATIO_FLOOR = 1e-12


@dataclass(frozen=True)
class FitResult:
    model: str
    a: float
    b: float
    c: float
    sse: float
    aic: float
    converged: bool
    iterations: int

    def predict(self, n) -> np.ndarray:
        return _MODELS[self.model][0](np.asarray(n, dtype=float), self.c) * self.b + self.a

    def to_dict(self) -> dict:
        return asdict(self)


def _exp_basis(n, c):
    return np.exp(-c * n)


def _exp_dbasis_dc(n, c):
    return -n * np.exp(-c * n)


def _pow_basis(n, c):
    return n ** (-c)


def _pow_dbasis_dc(n, c):
    return -np.log(n) * n ** (-c)


_MODELS = {
    "exponential": (_exp_basis, _exp_dbasis_dc),
    "power_law": (_pow_basis, _pow_dbasis_dc),
}


def corrected_aic(sse: float, m: int, k: int = N_PARAMS, sse_floor: float = 0.0) -> float:
    """m ln(sse/m) + 2km/(m-k-1).

    sse is floored (at ``sse_floor``, and always above zero) so that fits exact
    to round-off score alike; with m <= k + 1 the small-sample correction is
    undefined and the plain 2k penalty is used.
    """
    sse = max(sse, sse_floor, m * 1e-300)
    penalty = 2.0 * k * m / (m - k - 1) if m - k - 1 > 0 else 2.0 * k
    return m * math.log(sse / m) + penalty


def _levenberg_marquardt(n, q, basis, dbasis, theta):
    """Damped Gauss-Newton on (a, b, u) with c = exp(u)."""

    def residual(t):
        return t[0] + t[1] * basis(n, math.exp(t[2])) - q

    def jacobian(t):
        c = math.exp(t[2])
        return np.column_stack([np.ones_like(n), basis(n, c), t[1] * c * dbasis(n, c)])

    r = residual(theta)
    sse = float(r @ r)
    mu = None
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        jac = jacobian(theta)
        grad = jac.T @ r
        if np.linalg.norm(grad) < GRAD_TOL or sse == 0.0:
            converged = True
            break
        scale = np.maximum(np.sum(jac * jac, axis=0), 1e-12)
        if mu is None:
            mu = 1e-3
        accepted = False
        while mu < 1e16:
            aug = np.vstack([jac, np.diag(np.sqrt(mu * scale))])
            rhs = np.concatenate([-r, np.zeros(3)])
            step = np.linalg.lstsq(aug, rhs, rcond=None)[0]
            trial = theta + step
            if not np.all(np.isfinite(trial)) or abs(trial[2]) > 50:
                mu *= 4.0
                continue
            r_new = residual(trial)
            sse_new = float(r_new @ r_new)
            if sse_new < sse:
                accepted = True
                break
            mu *= 4.0
        if not accepted:
            # no descent direction left at working precision
            converged = np.linalg.norm(grad) < 1e-6 * max(1.0, math.sqrt(sse)) or sse < 1e-28
            break
        rel = (sse - sse_new) / sse
        theta, r, sse = trial, r_new, sse_new
        mu = max(mu / 3.0, 1e-15)
        if rel < REL_SSE_TOL:
            converged = True
            break
    return theta, sse, converged, it


def _fit(profile: DecayProfile, model: str) -> FitResult:
    if len(profile) < MIN_SAMPLES:
        raise PreconditionError(f"need at least {MIN_SAMPLES} samples, got {len(profile)}")
    n, q = profile.n, profile.q
    if model == "power_law" and n.min() < 1:
        raise PreconditionError("power-law fit needs distances >= 1")
    basis, dbasis = _MODELS[model]
    best = None
    for c0 in START_RATES:
        design = np.column_stack([np.ones_like(n), basis(n, c0)])
        a0, b0 = np.linalg.lstsq(design, q, rcond=None)[0]
        theta, sse, conv, iters = _levenberg_marquardt(n, q, basis, dbasis,
                                                       np.array([a0, b0, math.log(c0)]))
        key = (sse, not conv)
        if best is None or key < best[0]:
            best = (key, theta, sse, conv, iters)
    _, theta, sse, conv, iters = best
    # residuals below the data's own round-off carry no information
    floor = len(n) * (np.finfo(float).eps * float(np.max(np.abs(q)))) ** 2
    return FitResult(model, float(theta[0]), float(theta[1]), float(math.exp(theta[2])), sse,
                     corrected_aic(sse, len(n), sse_floor=floor), bool(conv), iters)


def fit_exponential(profile: DecayProfile) -> FitResult:
    """Least-squares fit of q = a + b exp(-c n), c >= 0."""
    return _fit(profile, "exponential")


def fit_power_law(profile: DecayProfile) -> FitResult:
    """Least-squares fit of q = a + b n^(-c), c >= 0."""
    return _fit(profile, "power_law")


@dataclass(frozen=True)
class ModelSelection:
    exponential: FitResult
    power_law: FitResult
    preferred: str

    def to_dict(self) -> dict:
        return {"exponential": self.exponential.to_dict(), "power_law": self.power_law.to_dict(),
                "preferred": self.preferred}


def select_model(profile: DecayProfile) -> ModelSelection:
    """Fit both families and prefer the lower corrected AIC ("inconclusive" on a tie)."""
    exp_fit, pow_fit = fit_exponential(profile), fit_power_law(profile)
    if abs(exp_fit.aic - pow_fit.aic) < AIC_TIE:
        preferred = "inconclusive"
    else:
        preferred = "exponential" if exp_fit.aic < pow_fit.aic else "power_law"
    return ModelSelection(exp_fit, pow_fit, preferred)


class UndefinedRatioError(DomainError):
    """Range ratio requested for a profile whose first value vanishes."""


def range_ratio(q_values) -> float:
    """sum(q_1..q_M) / (M q_1)."""
    q = np.asarray(q_values, dtype=float)
    if q.size < 1:
        raise PreconditionError("need at least one discord value")
    if q[0] <= RATIO_FLOOR:
        raise UndefinedRatioError(f"nearest-neighbour discord {q[0]:.3e} is too small for a ratio")
    return float((q / q[0]).sum() / q.size)


@dataclass(frozen=True)
class HeatmapGrid:
    gammas: np.ndarray
    lambdas: np.ndarray
    ratios: np.ndarray  # shape (len(gammas), len(lambdas)); NaN where undefined
    m: int

    def rows(self):
        """(gamma, lambda, ratio) in row-major (gamma-outer) order."""
        for i, g in enumerate(self.gammas):
            for j, lam in enumerate(self.lambdas):
                yield float(g), float(lam), float(self.ratios[i, j])


def _axis(bounds, steps: int) -> np.ndarray:
    lo, hi = bounds
    if steps < 1:
        raise PreconditionError("steps must be >= 1")
    return np.array([float(lo)]) if steps == 1 else np.linspace(lo, hi, steps)


def _ratio_cell(args) -> float:
    from .xy import XYParams, discord_profile

    gamma, lam, m, tol = args
    prof = discord_profile(XYParams(gamma, lam), m, tol)
    try:
        return range_ratio(prof.values)
    except UndefinedRatioError:
        return math.nan


def heatmap_scan(gamma_range, lambda_range, steps, m: int = 10, tol: float = 1e-10,
                 workers: int = 1) -> HeatmapGrid:
    """Range ratio over a (gamma, lambda) grid; cells are independent."""
    if m < 1:
        raise PreconditionError("M must be >= 1")
    g_steps, l_steps = (steps, steps) if isinstance(steps, int) else steps
    gammas, lambdas = _axis(gamma_range, g_steps), _axis(lambda_range, l_steps)
    cells = [(float(g), float(lam), m, tol) for g in gammas for lam in lambdas]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_ratio_cell, cells))
    else:
        values = [_ratio_cell(c) for c in cells]
    return HeatmapGrid(gammas, lambdas, np.array(values).reshape(len(gammas), len(lambdas)), m)
