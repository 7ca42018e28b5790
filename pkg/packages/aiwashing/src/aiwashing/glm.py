"""Binary logit, proportional-odds ordered logit and least squares.

All three estimators share ``DesignMatrix`` and return a ``FitResult``.
Log-likelihood totals use compensated summation so fits are reproducible to
the last bits regardless of how row blocks are scheduled.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy import linalg, optimize, stats
from scipy.special import expit, logit

from .exceptions import (
    DegenerateOutcome,
    InvalidDesign,
    InvalidOutcome,
    InvalidSpec,
    PerfectSeparation,
    SchemaMismatch,
    SingularDesign,
    SingularHessian,
    SparseLevel,
    UnknownColumn,
)
from .models import FitResult, ModelKind
from .reporting import coefficient_cell, format_table

logger = logging.getLogger(__name__)

INTERCEPT = "const"
MAX_ITERATIONS = 100
LOGLIKE_TOLERANCE = 1e-10
GRADIENT_TOLERANCE = 1e-8
SEPARATION_BOUND = 30.0


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Named covariate matrix; the first column is the intercept when present.

    Raises:
        InvalidDesign: shape, name or finiteness problems, or n <= columns
        SingularDesign: a non-intercept column is constant
    """

    values: np.ndarray
    columns: tuple[str, ...]
    intercept: bool = False

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=float)
        columns = tuple(self.columns)
        if values.ndim != 2 or values.shape[1] != len(columns):
            raise InvalidDesign(
                f"Design has shape {values.shape} but {len(columns)} column names"
            )
        if len(set(columns)) != len(columns):
            raise InvalidDesign(f"Duplicate column names in {columns}")
        if not np.isfinite(values).all():
            raise InvalidDesign("Design contains non-finite values")
        if values.shape[0] <= values.shape[1]:
            raise InvalidDesign(
                f"Need more rows than columns, got {values.shape[0]} × {values.shape[1]}"
            )

        start = 1 if self.intercept else 0
        constant = [
            columns[j] for j in range(start, len(columns)) if np.ptp(values[:, j]) == 0.0
        ]
        if constant:
            raise SingularDesign(constant)

        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", columns)

    @classmethod
    def from_frame(
        cls, frame: pd.DataFrame, columns: Sequence[str], *, intercept: bool = True
    ) -> "DesignMatrix":
        columns = list(columns)
        if any(c not in frame.columns for c in columns):
            raise SchemaMismatch(columns, frame.columns)
        values = frame[columns].to_numpy(dtype=float)
        if intercept:
            values = np.column_stack([np.ones(len(frame)), values])
            columns = [INTERCEPT, *columns]
        return cls(values, tuple(columns), intercept)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]

    def index_of(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise UnknownColumn(name) from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index_of(name)]

    def check_rank(self) -> None:
        """Raise ``SingularDesign`` naming the columns a pivoted QR finds dependent."""
        scale = np.linalg.norm(self.values, axis=0)
        scale[scale == 0.0] = 1.0
        _, r, pivots = linalg.qr(self.values / scale, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        tol = diag[0] * max(self.values.shape) * np.finfo(float).eps * 100
        rank = int((diag > tol).sum())
        if rank < self.n_columns:
            raise SingularDesign(self.columns[j] for j in sorted(pivots[rank:]))


# Binary logit


def logit_loglike(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    eta = X @ beta
    return math.fsum(y * eta - np.logaddexp(0.0, eta))


def logit_score(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    return X.T @ (y - expit(X @ beta))


def _logit_information(beta: np.ndarray, X: np.ndarray) -> np.ndarray:
    p = expit(X @ beta)
    return X.T @ (X * (p * (1.0 - p))[:, None])


def _binary_outcome(y: Sequence[float], n: int) -> np.ndarray:
    arr = np.asarray(y, dtype=float).ravel()
    if arr.shape[0] != n:
        raise InvalidOutcome(f"Outcome has {arr.shape[0]} rows, design has {n}")
    if not np.isin(arr, (0.0, 1.0)).all():
        raise InvalidOutcome("Binary outcome must be coded 0/1")
    if arr.min() == arr.max():
        raise DegenerateOutcome(float(arr[0]))
    return arr


def _cluster_sandwich(
    bread: np.ndarray, scores: np.ndarray, cluster: Sequence[object]
) -> tuple[np.ndarray, int]:
    """CR1 sandwich around ``bread`` with per-row ``scores`` summed by cluster."""
    groups, _ = pd.factorize(pd.Series(list(cluster)), sort=True)
    n_groups = int(groups.max()) + 1
    if n_groups < 2:
        raise InvalidDesign("Cluster-robust errors need at least 2 clusters")
    n, k = scores.shape
    summed = np.zeros((n_groups, k))
    np.add.at(summed, groups, scores)
    meat = summed.T @ summed
    adjust = n_groups / (n_groups - 1) * (n - 1) / max(n - k, 1)
    return adjust * bread @ meat @ bread, n_groups


def _invert(information: np.ndarray, iteration: Optional[int] = None) -> np.ndarray:
    try:
        inverse = linalg.inv(information)
    except linalg.LinAlgError:
        raise SingularHessian(iteration) from None
    if not np.isfinite(inverse).all():
        raise SingularHessian(iteration)
    return inverse


def _result(
    kind: ModelKind,
    columns: Sequence[str],
    params: np.ndarray,
    covariance: np.ndarray,
    *,
    log_likelihood: float,
    null_log_likelihood: float,
    pseudo_r2: float,
    n_obs: int,
    converged: bool,
    iterations: int,
    outcome: str,
    thresholds: Sequence[float] = (),
    cluster_count: Optional[int] = None,
) -> FitResult:
    variances = np.diag(covariance)
    if (variances <= 0.0).any() or not np.isfinite(variances).all():
        raise SingularHessian()
    se = np.sqrt(variances)
    k = len(columns)
    return FitResult(
        model_kind=kind,
        columns=tuple(columns),
        coefficients={c: float(b) for c, b in zip(columns, params)},
        std_errors={c: float(s) for c, s in zip(columns, se[:k])},
        z_values={c: float(b / s) for c, b, s in zip(columns, params, se[:k])},
        covariance=covariance,
        log_likelihood=float(log_likelihood),
        null_log_likelihood=float(null_log_likelihood),
        pseudo_r2=float(pseudo_r2),
        n_obs=n_obs,
        converged=converged,
        iterations=iterations,
        thresholds=tuple(float(t) for t in thresholds),
        threshold_std_errors=tuple(float(s) for s in se[k:]),
        outcome=outcome,
        cluster_count=cluster_count,
    )


def fit_logit(
    X: DesignMatrix,
    y: Sequence[float],
    *,
    cluster: Optional[Sequence[object]] = None,
    outcome: str = "",
) -> FitResult:
    """Newton–Raphson maximum likelihood for P(y = 1) = σ(xβ).

    Stops when the log-likelihood changes by less than 1e-10 or the gradient
    max-norm falls below 1e-8, after at most 100 iterations. A step that
    lowers the likelihood is halved until it does not. Standard errors come
    from the inverse observed information, or from a CR1 sandwich when
    ``cluster`` labels are given.

    Raises:
        InvalidOutcome: y is not coded 0/1
        DegenerateOutcome: y has a single class
        SingularDesign: design columns are collinear
        PerfectSeparation: the linear index exceeds 30 in magnitude while
            the likelihood is still improving
        SingularHessian: the information matrix cannot be inverted
    """
    values = X.values
    y_arr = _binary_outcome(y, X.n_obs)
    X.check_rank()

    beta = np.zeros(X.n_columns)
    if X.intercept:
        beta[0] = float(logit(y_arr.mean()))
    loglike = logit_loglike(beta, values, y_arr)

    converged = False
    iteration = 0
    for iteration in range(1, MAX_ITERATIONS + 1):
        gradient = logit_score(beta, values, y_arr)
        if np.max(np.abs(gradient)) < GRADIENT_TOLERANCE:
            converged = True
            break
        try:
            step = linalg.solve(_logit_information(beta, values), gradient, assume_a="pos")
        except linalg.LinAlgError:
            raise SingularHessian(iteration) from None

        scale = 1.0
        candidate = beta + step
        new_loglike = logit_loglike(candidate, values, y_arr)
        while new_loglike < loglike and scale > 1e-10:
            scale /= 2.0
            candidate = beta + scale * step
            new_loglike = logit_loglike(candidate, values, y_arr)

        if new_loglike > loglike and np.max(np.abs(values @ candidate)) > SEPARATION_BOUND:
            raise PerfectSeparation(iteration)

        change = new_loglike - loglike
        beta, loglike = candidate, new_loglike
        logger.debug("logit iteration %d: loglike=%.10f step=%g", iteration, loglike, scale)
        if abs(change) < LOGLIKE_TOLERANCE:
            converged = True
            break

    information = _logit_information(beta, values)
    covariance = _invert(information, iteration)
    cluster_count = None
    if cluster is not None:
        scores = values * (y_arr - expit(values @ beta))[:, None]
        covariance, cluster_count = _cluster_sandwich(covariance, scores, cluster)

    ybar = y_arr.mean()
    null = X.n_obs * (ybar * math.log(ybar) + (1.0 - ybar) * math.log(1.0 - ybar))
    pseudo_r2 = 1.0 - loglike / null
    if X.intercept:
        pseudo_r2 = max(0.0, pseudo_r2)
    if not converged:
        logger.warning("Logit did not converge in %d iterations", MAX_ITERATIONS)

    return _result(
        ModelKind.BINARY_LOGIT,
        X.columns,
        beta,
        covariance,
        log_likelihood=loglike,
        null_log_likelihood=null,
        pseudo_r2=pseudo_r2,
        n_obs=X.n_obs,
        converged=converged,
        iterations=iteration,
        outcome=outcome,
        cluster_count=cluster_count,
    )


def fractional_logit(
    values: np.ndarray, target: np.ndarray, start: Optional[np.ndarray] = None
) -> np.ndarray:
    """Logit coefficients for outcome probabilities in [0, 1].

    Maximizes the same likelihood as ``fit_logit`` with ``y`` replaced by
    ``target``; the maximizer is the large-sample limit of a logit fit to
    Bernoulli draws of ``target``. No standard errors are produced.
    """
    values = np.asarray(values, dtype=float)
    target = np.asarray(target, dtype=float)
    beta = np.zeros(values.shape[1]) if start is None else np.array(start, dtype=float)
    for iteration in range(1, MAX_ITERATIONS + 1):
        gradient = logit_score(beta, values, target)
        try:
            step = linalg.solve(_logit_information(beta, values), gradient, assume_a="pos")
        except linalg.LinAlgError:
            raise SingularHessian(iteration) from None
        beta = beta + step
        if np.max(np.abs(step)) < 1e-13 * (1.0 + np.max(np.abs(beta))):
            break
    return beta


# Ordered logit


def _ordinal_outcome(y: Sequence[float], n: int) -> tuple[np.ndarray, int]:
    arr = np.asarray(y, dtype=float).ravel()
    if arr.shape[0] != n:
        raise InvalidOutcome(f"Outcome has {arr.shape[0]} rows, design has {n}")
    if not np.isfinite(arr).all() or (arr != np.round(arr)).any() or arr.min() < 0:
        raise InvalidOutcome("Ordinal outcome must be coded 0, 1, ..., K-1")
    codes = arr.astype(int)
    if codes.min() == codes.max():
        raise DegenerateOutcome(float(codes[0]))
    n_levels = int(codes.max()) + 1
    counts = np.bincount(codes, minlength=n_levels)
    for level in range(n_levels):
        if counts[level] == 0:
            raise SparseLevel(level)
    return codes, n_levels


def thresholds_from_params(tau_params: np.ndarray) -> np.ndarray:
    """τ_0 followed by τ_0 + cumulative exp(δ_j); strictly increasing."""
    tau_params = np.asarray(tau_params, dtype=float)
    return tau_params[0] + np.concatenate([[0.0], np.cumsum(np.exp(tau_params[1:]))])


def _threshold_jacobian(tau_params: np.ndarray) -> np.ndarray:
    """d(τ_0..τ_{K-2}) / d(τ_0, δ_1..δ_{K-2})."""
    m = len(tau_params)
    jac = np.zeros((m, m))
    jac[:, 0] = 1.0
    for j in range(1, m):
        jac[j:, j] = math.exp(tau_params[j])
    return jac


def _ologit_terms(
    params: np.ndarray, X: np.ndarray, codes: np.ndarray, n_levels: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row log-probabilities and per-row score contributions."""
    k = X.shape[1]
    tau_params = params[k:]
    tau = thresholds_from_params(tau_params)
    eta = X @ params[:k]
    cuts = np.concatenate([[-np.inf], tau, [np.inf]])
    upper = cuts[codes + 1] - eta
    lower = cuts[codes] - eta

    cdf_upper = expit(upper)
    cdf_lower = expit(lower)
    # Difference taken on the tail that keeps precision
    prob = np.where(lower > 0.0, expit(-lower) - expit(-upper), cdf_upper - cdf_lower)
    prob = np.maximum(prob, 1e-300)
    pdf_upper = cdf_upper * (1.0 - cdf_upper)
    pdf_lower = cdf_lower * (1.0 - cdf_lower)

    d_eta = -(pdf_upper - pdf_lower) / prob
    d_tau = np.zeros((len(codes), n_levels - 1))
    rows = np.arange(len(codes))
    top = codes < n_levels - 1
    bottom = codes > 0
    d_tau[rows[top], codes[top]] += pdf_upper[top] / prob[top]
    d_tau[rows[bottom], codes[bottom] - 1] -= pdf_lower[bottom] / prob[bottom]

    scores = np.column_stack([X * d_eta[:, None], d_tau @ _threshold_jacobian(tau_params)])
    return np.log(prob), scores


def ologit_loglike(
    params: np.ndarray, X: np.ndarray, y: np.ndarray, n_levels: Optional[int] = None
) -> float:
    """Log-likelihood at ``params`` = (β, τ_0, δ_1, ..., δ_{K-2})."""
    codes = np.asarray(y).astype(int)
    n_levels = n_levels or int(codes.max()) + 1
    logp, _ = _ologit_terms(np.asarray(params, dtype=float), X, codes, n_levels)
    return math.fsum(logp)


def ologit_score(
    params: np.ndarray, X: np.ndarray, y: np.ndarray, n_levels: Optional[int] = None
) -> np.ndarray:
    codes = np.asarray(y).astype(int)
    n_levels = n_levels or int(codes.max()) + 1
    _, scores = _ologit_terms(np.asarray(params, dtype=float), X, codes, n_levels)
    return scores.sum(axis=0)


def _numeric_hessian(gradient, params: np.ndarray) -> np.ndarray:
    """Central differences of an analytic gradient, symmetrized."""
    size = len(params)
    hessian = np.empty((size, size))
    for j in range(size):
        h = 1e-5 * max(1.0, abs(params[j]))
        up = params.copy()
        down = params.copy()
        up[j] += h
        down[j] -= h
        hessian[:, j] = (gradient(up) - gradient(down)) / (2.0 * h)
    return 0.5 * (hessian + hessian.T)


def fit_ologit(
    X: DesignMatrix,
    y: Sequence[float],
    *,
    cluster: Optional[Sequence[object]] = None,
    outcome: str = "",
) -> FitResult:
    """Proportional-odds model P(y <= k) = σ(τ_k − xβ).

    Thresholds are parameterized as τ_0 plus positive increments exp(δ_j), so
    they stay ordered throughout. BFGS finds the basin; Newton steps on a
    numerical Hessian of the analytic score then polish to the same
    tolerances as ``fit_logit``. Threshold standard errors are mapped from
    the increment parameterization by the delta method.

    Raises:
        InvalidDesign: the design carries an intercept
        InvalidOutcome: y is not coded 0..K-1
        SparseLevel: a level between 0 and max(y) is never observed
    """
    if X.intercept:
        raise InvalidDesign("Ordered logit absorbs the intercept into its thresholds")
    values = X.values
    codes, n_levels = _ordinal_outcome(y, X.n_obs)
    X.check_rank()
    n, k = values.shape

    counts = np.bincount(codes, minlength=n_levels)
    cumulative = np.cumsum(counts)[:-1] / n
    start_tau = logit(cumulative)
    params = np.concatenate([np.zeros(k), [start_tau[0]], np.log(np.diff(start_tau))])

    def loglike(p: np.ndarray) -> float:
        return ologit_loglike(p, values, codes, n_levels)

    def score(p: np.ndarray) -> np.ndarray:
        return ologit_score(p, values, codes, n_levels)

    def objective(p: np.ndarray) -> tuple[float, np.ndarray]:
        logp, scores = _ologit_terms(p, values, codes, n_levels)
        return -math.fsum(logp) / n, -scores.sum(axis=0) / n

    search = optimize.minimize(
        objective, params, jac=True, method="BFGS", options={"gtol": 1e-9, "maxiter": 1000}
    )
    params = search.x
    iterations = int(search.nit)
    current = loglike(params)

    converged = False
    for step_no in range(1, MAX_ITERATIONS + 1):
        gradient = score(params)
        if np.max(np.abs(gradient)) < GRADIENT_TOLERANCE:
            converged = True
            break
        hessian = _numeric_hessian(score, params)
        try:
            step = linalg.solve(-hessian, gradient, assume_a="sym")
        except linalg.LinAlgError:
            raise SingularHessian(iterations + step_no) from None

        scale = 1.0
        candidate = params + step
        new = loglike(candidate)
        while new < current and scale > 1e-10:
            scale /= 2.0
            candidate = params + scale * step
            new = loglike(candidate)
        change = new - current
        params, current = candidate, new
        iterations += 1
        logger.debug("ologit polish %d: loglike=%.10f", step_no, current)
        if abs(change) < LOGLIKE_TOLERANCE:
            converged = True
            break

    information = -_numeric_hessian(score, params)
    covariance = _invert(information, iterations)
    cluster_count = None
    if cluster is not None:
        _, scores = _ologit_terms(params, values, codes, n_levels)
        covariance, cluster_count = _cluster_sandwich(covariance, scores, cluster)

    jacobian = linalg.block_diag(np.eye(k), _threshold_jacobian(params[k:]))
    covariance = jacobian @ covariance @ jacobian.T

    null = math.fsum(c * math.log(c / n) for c in counts)
    if not converged:
        logger.warning("Ordered logit did not converge")

    return _result(
        ModelKind.ORDERED_LOGIT,
        X.columns,
        params[:k],
        covariance,
        log_likelihood=current,
        null_log_likelihood=null,
        pseudo_r2=1.0 - current / null,
        n_obs=n,
        converged=converged,
        iterations=iterations,
        outcome=outcome,
        thresholds=thresholds_from_params(params[k:]),
        cluster_count=cluster_count,
    )


# Least squares


def fit_ols(
    X: DesignMatrix,
    y: Sequence[float],
    *,
    robust: bool = False,
    cluster: Optional[Sequence[object]] = None,
    outcome: str = "",
) -> FitResult:
    """Ordinary least squares with classical, HC1 or cluster-robust errors.

    ``pseudo_r2`` carries R² and ``log_likelihood`` the Gaussian
    log-likelihood at the ML variance.
    """
    values = X.values
    y_arr = np.asarray(y, dtype=float).ravel()
    if y_arr.shape[0] != X.n_obs or not np.isfinite(y_arr).all():
        raise InvalidOutcome("Outcome must be finite with one value per design row")
    X.check_rank()
    n, k = values.shape

    beta, *_ = linalg.lstsq(values, y_arr)
    resid = y_arr - values @ beta
    rss = math.fsum(resid**2)
    try:
        xtx_inv = linalg.inv(values.T @ values)
    except linalg.LinAlgError:
        raise SingularDesign(X.columns) from None

    cluster_count = None
    if cluster is not None:
        covariance, cluster_count = _cluster_sandwich(
            xtx_inv, values * resid[:, None], cluster
        )
    elif robust:
        meat = values.T @ (values * (resid**2)[:, None])
        covariance = n / (n - k) * xtx_inv @ meat @ xtx_inv
    else:
        covariance = rss / (n - k) * xtx_inv

    centre = y_arr.mean() if X.intercept else 0.0
    tss = math.fsum((y_arr - centre) ** 2)
    if tss == 0.0:
        raise DegenerateOutcome(float(y_arr[0]))
    null_rss = math.fsum((y_arr - y_arr.mean()) ** 2)

    def gaussian(ss: float) -> float:
        return -0.5 * n * (math.log(2.0 * math.pi * max(ss, 1e-300) / n) + 1.0)

    return _result(
        ModelKind.OLS,
        X.columns,
        beta,
        covariance,
        log_likelihood=gaussian(rss),
        null_log_likelihood=gaussian(null_rss),
        pseudo_r2=1.0 - rss / tss,
        n_obs=n,
        converged=True,
        iterations=1,
        outcome=outcome,
        cluster_count=cluster_count,
    )


# Prediction and marginal effects


def _check_columns(fit: FitResult, X: DesignMatrix) -> None:
    if tuple(X.columns) != fit.columns:
        raise SchemaMismatch(fit.columns, X.columns)


def _probabilities(fit: FitResult, values: np.ndarray) -> np.ndarray:
    eta = values @ fit.params
    if fit.model_kind is ModelKind.BINARY_LOGIT:
        p = expit(eta)
        return np.column_stack([1.0 - p, p])
    if fit.model_kind is ModelKind.ORDERED_LOGIT:
        tau = np.asarray(fit.thresholds)
        cumulative = expit(tau[None, :] - eta[:, None])
        ones = np.ones((len(eta), 1))
        return np.diff(np.hstack([0.0 * ones, cumulative, ones]), axis=1)
    raise InvalidSpec("Least-squares fits have no category probabilities")


def _outcome_mean(
    fit: FitResult, values: np.ndarray, category: Optional[int] = None
) -> np.ndarray:
    """Per-row P(y = 1), P(y = category) or expected category."""
    if fit.model_kind is ModelKind.OLS:
        return values @ fit.params
    probs = _probabilities(fit, values)
    if category is not None:
        return probs[:, category]
    if fit.model_kind is ModelKind.BINARY_LOGIT:
        return probs[:, 1]
    return probs @ np.arange(probs.shape[1])


def predict_prob(fit: FitResult, X: DesignMatrix) -> np.ndarray:
    """Category probabilities, one row per observation.

    Binary fits return an n × 2 matrix (P(y=0), P(y=1)); ordered fits
    return n × K. Rows sum to one.

    Raises:
        SchemaMismatch: X columns differ from the fit's
    """
    _check_columns(fit, X)
    return _probabilities(fit, X.values)


def predict_linear(fit: FitResult, X: DesignMatrix) -> np.ndarray:
    _check_columns(fit, X)
    return X.values @ fit.params


def average_marginal_effect(
    fit: FitResult,
    X: DesignMatrix,
    var: str,
    *,
    category: Optional[int] = None,
    discrete: Optional[bool] = None,
) -> float:
    """Sample-average effect of ``var`` on the predicted outcome.

    Continuous columns use the analytic derivative; 0/1 columns (or
    ``discrete=True``) use the mean difference between var = 1 and var = 0.
    For ordered fits the quantity is the expected category unless a
    ``category`` is named.

    Raises:
        UnknownColumn: var is not a design column
    """
    if var not in X.columns:
        raise UnknownColumn(var)
    _check_columns(fit, X)
    j = X.index_of(var)
    values = X.values
    if discrete is None:
        discrete = bool(np.isin(values[:, j], (0.0, 1.0)).all())

    if discrete:
        high = values.copy()
        low = values.copy()
        high[:, j] = 1.0
        low[:, j] = 0.0
        diff = _outcome_mean(fit, high, category) - _outcome_mean(fit, low, category)
        return float(np.mean(diff))

    beta = fit.coefficients[var]
    if fit.model_kind is ModelKind.OLS:
        return float(beta)
    eta = values @ fit.params
    if fit.model_kind is ModelKind.BINARY_LOGIT:
        p = expit(eta)
        slope = p * (1.0 - p)
        if category == 0:
            slope = -slope
        return float(np.mean(beta * slope))

    tau = np.asarray(fit.thresholds)
    cdf = expit(tau[None, :] - eta[:, None])
    pdf = cdf * (1.0 - cdf)
    if category is None:
        return float(np.mean(beta * pdf.sum(axis=1)))
    padded = np.hstack([np.zeros((len(eta), 1)), pdf, np.zeros((len(eta), 1))])
    return float(np.mean(-beta * (padded[:, category + 1] - padded[:, category])))


class ProbabilityMoves(NamedTuple):
    base: float
    shifted: float
    change: float
    relative_change: float
    at_min: float
    at_max: float
    step: float


def probability_moves(
    fit: FitResult,
    X: DesignMatrix,
    var: str,
    *,
    step: Optional[float] = None,
    category: Optional[int] = None,
) -> ProbabilityMoves:
    """Mean predicted outcome at the data, after shifting ``var`` by ``step``
    (default one sample SD), and with ``var`` set to its sample min and max.
    """
    _check_columns(fit, X)
    j = X.index_of(var)
    values = X.values
    column = values[:, j]
    step = float(column.std(ddof=1)) if step is None else float(step)

    def mean_at(replacement: np.ndarray) -> float:
        moved = values.copy()
        moved[:, j] = replacement
        return float(np.mean(_outcome_mean(fit, moved, category)))

    base = float(np.mean(_outcome_mean(fit, values, category)))
    shifted = mean_at(column + step)
    return ProbabilityMoves(
        base=base,
        shifted=shifted,
        change=shifted - base,
        relative_change=(shifted - base) / base if base != 0.0 else float("nan"),
        at_min=mean_at(np.full_like(column, column.min())),
        at_max=mean_at(np.full_like(column, column.max())),
        step=step,
    )


# Frame-level helpers


def complete_cases(data: pd.DataFrame, columns: Sequence[str]) -> pd.DataFrame:
    missing = [c for c in columns if c not in data.columns]
    if missing:
        raise SchemaMismatch(list(columns), data.columns)
    return data.dropna(subset=list(dict.fromkeys(columns))).reset_index(drop=True)


def fit_model(
    data: pd.DataFrame,
    outcome: str,
    columns: Sequence[str],
    *,
    kind: ModelKind = ModelKind.BINARY_LOGIT,
    cluster: Optional[str] = None,
    robust: bool = False,
) -> FitResult:
    """Fit ``outcome`` on ``columns`` of a frame using complete cases.

    Logit and OLS designs get an intercept; ordered designs do not.
    ``cluster`` names a column of cluster labels.
    """
    kind = ModelKind(kind)
    needed = [outcome, *columns] + ([cluster] if cluster else [])
    frame = complete_cases(data, needed)
    X = DesignMatrix.from_frame(frame, columns, intercept=kind is not ModelKind.ORDERED_LOGIT)
    y = frame[outcome].to_numpy(dtype=float)
    labels = frame[cluster].to_numpy() if cluster else None
    if kind is ModelKind.BINARY_LOGIT:
        return fit_logit(X, y, cluster=labels, outcome=outcome)
    if kind is ModelKind.ORDERED_LOGIT:
        return fit_ologit(X, y, cluster=labels, outcome=outcome)
    return fit_ols(X, y, robust=robust, cluster=labels, outcome=outcome)


def design_for(data: pd.DataFrame, fit: FitResult) -> DesignMatrix:
    """Rebuild the design matrix a frame-level fit was estimated on."""
    columns = [c for c in fit.columns if c != INTERCEPT]
    frame = complete_cases(data, [fit.outcome, *columns] if fit.outcome else columns)
    return DesignMatrix.from_frame(frame, columns, intercept=INTERCEPT in fit.columns)


def nested_specifications(
    data: pd.DataFrame,
    outcome: str,
    treatment: str,
    control_blocks: Sequence[Sequence[str]],
    *,
    kind: ModelKind = ModelKind.BINARY_LOGIT,
    cluster: Optional[str] = None,
) -> list[FitResult]:
    """One fit per cumulative control block, starting from ``treatment`` alone
    when the first block is empty.
    """
    fits: list[FitResult] = []
    columns = [treatment]
    for block in control_blocks:
        columns = columns + [c for c in block if c not in columns]
        fits.append(fit_model(data, outcome, columns, kind=kind, cluster=cluster))
    return fits


def coefficient_frame(fit: FitResult) -> pd.DataFrame:
    """``term,coef,se,z,p`` rows; ordered fits append ``cut<k>`` rows."""
    p_values = fit.p_values
    rows = [
        (c, fit.coefficients[c], fit.std_errors[c], fit.z_values[c], p_values[c])
        for c in fit.columns
    ]
    for k, (tau, se) in enumerate(zip(fit.thresholds, fit.threshold_std_errors)):
        z = tau / se
        rows.append((f"cut{k}", tau, se, z, float(2.0 * stats.norm.sf(abs(z)))))
    return pd.DataFrame(rows, columns=["term", "coef", "se", "z", "p"])


_MODEL_LABELS = {
    ModelKind.BINARY_LOGIT: "Logit",
    ModelKind.ORDERED_LOGIT: "Ologit",
    ModelKind.OLS: "OLS",
}


def regression_table(
    fits: Sequence[FitResult],
    *,
    shown: Optional[Sequence[str]] = None,
    labels: Optional[Sequence[str]] = None,
) -> pd.DataFrame:
    """Side-by-side coefficient table: ``coef*** (z)`` cells, a row stating
    whether further controls are in, N and pseudo-R².
    """
    labels = list(labels) if labels else [f"({i + 1})" for i in range(len(fits))]
    if shown is None:
        shown = list(
            dict.fromkeys(c for fit in fits for c in fit.columns if c != INTERCEPT)
        )
    rows: list[list[str]] = []
    rows.append(["Model", *(_MODEL_LABELS[f.model_kind] for f in fits)])
    for term in shown:
        cells = []
        for fit in fits:
            if term in fit.coefficients:
                cells.append(
                    coefficient_cell(
                        fit.coefficients[term], fit.z_values[term], fit.p_values[term]
                    )
                )
            else:
                cells.append("")
        rows.append([term, *cells])

    def other_controls(fit: FitResult) -> str:
        extra = [c for c in fit.columns if c != INTERCEPT and c not in shown]
        return "Yes" if extra else "No"

    rows.append(["Other controls", *(other_controls(f) for f in fits)])
    rows.append(["Observations", *(str(f.n_obs) for f in fits)])
    rows.append(["Pseudo R2", *(f"{f.pseudo_r2:.3f}" for f in fits)])
    return pd.DataFrame(rows, columns=["Variable", *labels])


def regression_table_text(
    fits: Sequence[FitResult],
    *,
    shown: Optional[Sequence[str]] = None,
    labels: Optional[Sequence[str]] = None,
    title: Optional[str] = None,
) -> str:
    return format_table(
        regression_table(fits, shown=shown, labels=labels),
        title=title,
        note="z-values in parentheses; *** p<0.01, ** p<0.05, * p<0.1",
    )


__all__ = [
    "INTERCEPT",
    "DesignMatrix",
    "ProbabilityMoves",
    "average_marginal_effect",
    "coefficient_frame",
    "complete_cases",
    "design_for",
    "fit_logit",
    "fit_model",
    "fit_ologit",
    "fit_ols",
    "fractional_logit",
    "logit_loglike",
    "logit_score",
    "nested_specifications",
    "ologit_loglike",
    "ologit_score",
    "predict_linear",
    "predict_prob",
    "probability_moves",
    "regression_table",
    "regression_table_text",
    "thresholds_from_params",
]
