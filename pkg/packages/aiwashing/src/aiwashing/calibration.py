"""Solvers that tune synthetic draws so their estimands hit target values.

Every routine here is deterministic given its inputs: randomness enters only
through arrays or generators handed in by the caller.
"""

import logging
from collections.abc import Callable, Sequence
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg, optimize, special

from .exceptions import CalibrationFailure
from .glm import fractional_logit

logger = logging.getLogger(__name__)

TOLERANCE = 1e-6
_BRACKET_LIMIT = 1024.0


def _bracketed_root(fn: Callable[[float], float], target: str) -> float:
    """Root of a monotone increasing ``fn``, expanding the bracket from ±1."""
    lo, hi = -1.0, 1.0
    while fn(lo) > 0.0 and lo > -_BRACKET_LIMIT:
        lo *= 2.0
    while fn(hi) < 0.0 and hi < _BRACKET_LIMIT:
        hi *= 2.0
    if fn(lo) > 0.0 or fn(hi) < 0.0:
        raise CalibrationFailure(target, f"no sign change on [{lo:g}, {hi:g}]")
    return float(optimize.brentq(fn, lo, hi, xtol=1e-14, rtol=1e-14))


def tilt_to_mean(values: Sequence[float], target: float) -> np.ndarray:
    """Probabilities ∝ exp(λ·z) whose weighted mean of ``values`` is ``target``.

    ``z`` is the standardized value, so λ is scale free.

    Raises:
        CalibrationFailure: ``target`` lies outside the open value range
    """
    x = np.asarray(values, dtype=float)
    if not x.min() < target < x.max():
        raise CalibrationFailure(
            "mean", f"target {target:.4f} outside value range ({x.min():.4f}, {x.max():.4f})"
        )
    z = (x - x.mean()) / x.std()

    def gap(lam: float) -> float:
        return float(special.softmax(lam * z) @ x) - target

    lam = _bracketed_root(gap, "mean")
    logger.debug("Mean tilt λ=%.6f for target %.4f", lam, target)
    return special.softmax(lam * z)


def tilt_to_moments(values: Sequence[float], mean: float, sd: float) -> np.ndarray:
    """Probabilities ∝ exp(λ₁z + λ₂z²) matching a target mean and SD.

    Raises:
        CalibrationFailure: the two moments cannot be reached on this support
    """
    x = np.asarray(values, dtype=float)
    z = (x - x.mean()) / x.std()

    def probabilities(lam: np.ndarray) -> np.ndarray:
        return special.softmax(lam[0] * z + lam[1] * z**2)

    def residual(lam: np.ndarray) -> np.ndarray:
        p = probabilities(lam)
        m = p @ x
        return np.array([(m - mean) / sd, (np.sqrt(p @ (x - m) ** 2) - sd) / sd])

    fit = optimize.least_squares(residual, np.zeros(2), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    gap = float(np.max(np.abs(residual(fit.x))))
    if gap > TOLERANCE:
        raise CalibrationFailure(
            "household washing moments",
            f"mean {mean:.4f} / sd {sd:.4f} unreachable, relative gap {gap:.2e}",
        )
    logger.debug("Moment tilt λ=(%.6f, %.6f)", *fit.x)
    return probabilities(fit.x)


def expected_rounded(latent: np.ndarray, half_width: float, top: int) -> np.ndarray:
    """E[clip(floor(c + e + 0.5), 0, top)] for e ~ Uniform(−h, h)."""
    steps = np.arange(1, top + 1)
    share = (half_width + np.asarray(latent, dtype=float)[:, None] - steps + 0.5) / (2.0 * half_width)
    return np.clip(share, 0.0, 1.0).sum(axis=1)


def draw_rounded(latent: np.ndarray, noise: np.ndarray, top: int) -> np.ndarray:
    return np.clip(np.floor(latent + noise + 0.5), 0, top).astype(int)


class MediatorCalibration(NamedTuple):
    intercept: float
    slope: float


def calibrate_mediator(
    base: np.ndarray,
    treatment: np.ndarray,
    design: np.ndarray,
    *,
    mean: float,
    slope: float,
    half_width: float,
    top: int,
    label: str = "mediator",
) -> MediatorCalibration:
    """Latent intercept and treatment loading for a rounded, clipped mediator.

    The latent value is ``intercept + loading·treatment + base``. The solved
    pair makes the expected mediator average ``mean`` and gives the OLS
    coefficient of the expected mediator on ``design`` (intercept first,
    treatment second) the value ``slope``.

    Raises:
        CalibrationFailure: no pair satisfies both conditions
    """
    if not 0.0 < mean < top:
        raise CalibrationFailure(label, f"mean {mean:g} outside (0, {top})")
    projection = linalg.pinv(design)[1]

    def residual(params: np.ndarray) -> np.ndarray:
        expected = expected_rounded(params[0] + params[1] * treatment + base, half_width, top)
        return np.array([expected.mean() - mean, projection @ expected - slope])

    start = np.array([mean - base.mean() - slope * treatment.mean(), slope])
    solution = optimize.root(residual, start, method="hybr")
    gap = float(np.max(np.abs(residual(solution.x))))
    if not solution.success or gap > TOLERANCE:
        raise CalibrationFailure(label, f"{solution.message} (residual {gap:.2e})")
    logger.debug("%s latent intercept=%.6f loading=%.6f", label, *solution.x)
    return MediatorCalibration(float(solution.x[0]), float(solution.x[1]))


class LogitCoefficient:
    """One coefficient of a logit fit to calibrated probabilities.

    Successive calls start Newton from the previous solution.
    """

    def __init__(self, design: np.ndarray, position: int, rows: Optional[np.ndarray] = None):
        self._rows = rows
        self._design = design if rows is None else design[rows]
        self._position = position
        self._start: Optional[np.ndarray] = None

    def __call__(self, probabilities: np.ndarray) -> float:
        p = probabilities if self._rows is None else probabilities[self._rows]
        beta = fractional_logit(self._design, p, start=self._start)
        self._start = beta
        return float(beta[self._position])


class Moment(NamedTuple):
    name: str
    target: float
    statistic: Callable[[np.ndarray], float]


def solve_logit_index(
    features: np.ndarray,
    offset: np.ndarray,
    moments: Sequence[Moment],
    start: np.ndarray,
    *,
    label: str = "outcome",
) -> np.ndarray:
    """Coefficients θ such that every moment of σ(offset + features·θ) is on target.

    The system must be square: one moment per column of ``features``.

    Raises:
        CalibrationFailure: the solver stops short of every target
    """
    if features.shape[1] != len(moments):
        raise CalibrationFailure(label, f"{features.shape[1]} unknowns for {len(moments)} moments")
    targets = np.array([m.target for m in moments])
    rounds = 0

    def residual(theta: np.ndarray) -> np.ndarray:
        nonlocal rounds
        rounds += 1
        p = special.expit(offset + features @ theta)
        values = np.array([m.statistic(p) for m in moments])
        logger.debug("%s round %d: max gap %.3e", label, rounds, np.max(np.abs(values - targets)))
        return values - targets

    solution = optimize.root(
        residual, np.asarray(start, dtype=float), method="hybr", options={"epsfcn": 1e-8}
    )
    gaps = residual(solution.x)
    worst = int(np.argmax(np.abs(gaps)))
    if not np.all(np.isfinite(gaps)) or abs(gaps[worst]) > TOLERANCE:
        raise CalibrationFailure(
            label, f"{moments[worst].name} misses its target by {gaps[worst]:.3e} ({solution.message})"
        )
    logger.info("%s calibrated in %d rounds", label, rounds)
    return solution.x


def ordinal_shift(eta: np.ndarray, thresholds: Sequence[float], mean: float) -> float:
    """Common threshold shift giving an ordered logit the expected level ``mean``.

    Raises:
        CalibrationFailure: ``mean`` outside (0, number of thresholds)
    """
    cuts = np.asarray(thresholds, dtype=float)
    if not 0.0 < mean < len(cuts):
        raise CalibrationFailure("ordinal mean", f"{mean:g} outside (0, {len(cuts)})")

    def gap(shift: float) -> float:
        # Increasing shift lowers the expected level
        return mean - float(special.expit(eta[:, None] - cuts - shift).sum(axis=1).mean())

    return _bracketed_root(gap, "ordinal mean")


def _unit_residual(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A random unit vector orthogonal to the columns of ``basis``."""
    q, _ = linalg.qr(basis, mode="economic")
    e = rng.standard_normal(basis.shape[0])
    e -= q @ (q.T @ e)
    return e / linalg.norm(e)


def correlated_series(
    x: Sequence[float],
    correlation: float,
    *,
    mean: float,
    spread: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """A series with the given sample mean, SD and exact correlation with ``x``."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 3 or not -1.0 <= correlation <= 1.0:
        raise CalibrationFailure("correlation", f"cannot build n={n}, rho={correlation:g}")
    centred = x - x.mean()
    unit_x = centred / linalg.norm(centred)
    unit_e = _unit_residual(np.column_stack([np.ones(n), x]), rng)
    u = correlation * unit_x + np.sqrt(1.0 - correlation**2) * unit_e
    return mean + spread * np.sqrt(n) * u


def exact_regression(
    x: Sequence[float],
    *,
    slope: float,
    t_value: float,
    centre: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Outcomes whose OLS fit on ``x`` has exactly this slope and t-statistic."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 3 or slope * t_value <= 0.0:
        raise CalibrationFailure("regression", f"slope {slope:g} with t {t_value:g} on n={n}")
    centred = x - x.mean()
    sxx = float(centred @ centred)
    rss = (slope / t_value) ** 2 * sxx * (n - 2)
    r = _unit_residual(np.column_stack([np.ones(n), x]), rng)
    return centre + slope * centred + np.sqrt(rss) * r


__all__ = [
    "LogitCoefficient",
    "MediatorCalibration",
    "Moment",
    "TOLERANCE",
    "calibrate_mediator",
    "correlated_series",
    "draw_rounded",
    "exact_regression",
    "expected_rounded",
    "ordinal_shift",
    "solve_logit_index",
    "tilt_to_mean",
    "tilt_to_moments",
]
