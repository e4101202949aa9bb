"""Nonlinear conjugate gradient with Armijo backtracking.

Iteration, for k >= 0::

    d^0 = -grad J(g^0)
    d^k = -grad J(g^k) + beta^k d^{k-1}
    g^{k+1} = g^k + alpha^k d^k

with ``beta`` from the Polak-Ribiere-Polyak or Fletcher-Reeves formula and
``alpha`` the largest of ``s, s rho, s rho^2, ...`` giving sufficient
decrease. Gradients may be represented in the Euclidean coefficient metric
or in the lumped L2 metric of the objective (see ``OptimizerConfig.metric``).
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


class BetaRule(str, enum.Enum):
    PRP = "prp"
    FR = "fr"


class Metric(str, enum.Enum):
    L2 = "l2"
    EUCLIDEAN = "euclidean"


class Termination(str, enum.Enum):
    J_BELOW_TOL = "JBelowTol"
    GRAD_BELOW_TOL = "GradBelowTol"
    MAX_ITERS = "MaxIters"
    LINE_SEARCH_FAILED = "LineSearchFailed"

    @property
    def converged(self) -> bool:
        return self in (Termination.J_BELOW_TOL, Termination.GRAD_BELOW_TOL)


class GradientVanished(ArithmeticError):
    """The previous gradient is zero, so beta is undefined; the run has converged."""


class LineSearchFailed(RuntimeError):
    def __init__(self, message, alphas=(), values=()):
        super().__init__(message)
        self.alphas = list(alphas)
        self.values = list(values)


@dataclass(frozen=True)
class ArmijoParams:
    s: float = 1.0
    rho: float = 0.5
    mu: float = 1e-4
    max_backtracks: int = 40

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"armijo.s must be positive, got {self.s!r}")
        if not 0 < self.rho < 1:
            raise ValueError(f"armijo.rho must lie in (0, 1), got {self.rho!r}")
        if not 0 < self.mu < 1:
            raise ValueError(f"armijo.mu must lie in (0, 1), got {self.mu!r}")
        if self.max_backtracks < 0:
            raise ValueError("armijo.max_backtracks must be >= 0")


@dataclass(frozen=True)
class OptimizerConfig:
    beta_rule: BetaRule = BetaRule.PRP
    armijo: ArmijoParams = field(default_factory=ArmijoParams)
    stop_J: float = 1e-6
    stop_grad: float = 1e-10
    max_iters: int = 500
    restart_on_nondescent: bool = True
    project_nonnegative: bool = False
    metric: Metric = Metric.L2

    def __post_init__(self):
        object.__setattr__(self, "beta_rule", BetaRule(self.beta_rule))
        object.__setattr__(self, "metric", Metric(self.metric))
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters!r}")
        if not self.stop_J >= 0 or not self.stop_grad >= 0:
            raise ValueError("stopping tolerances must be nonnegative")


@dataclass(frozen=True)
class IterationRecord:
    """State of iterate ``k``; ``alpha``, ``beta`` and ``backtracks`` describe
    the step that produced it (NaN / 0 for the starting point)."""

    k: int
    J: float
    grad_norm: float
    alpha: float = math.nan
    beta: float = math.nan
    backtracks: int = 0
    restarted: bool = False


@dataclass
class RunReport:
    records: list
    termination: Termination
    g: np.ndarray
    u: np.ndarray | None
    wall_time: float
    state: object = None
    message: str = ""

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    @property
    def J(self) -> float:
        return self.records[-1].J

    @property
    def converged(self) -> bool:
        return self.termination.converged


def _dot(a, b, weights=None):
    if weights is None:
        return float(np.dot(a, b))
    return float(np.dot(a, b / weights))


def prp_beta(grad_k, grad_prev, weights=None) -> float:
    """``grad_k . (grad_k - grad_prev) / |grad_prev|^2``.

    With ``weights`` the inner product is ``sum a b / weights`` (the dual of
    the weighted metric), i.e. the formula applied to Riesz representers.
    """
    grad_k = np.asarray(grad_k, dtype=float)
    grad_prev = np.asarray(grad_prev, dtype=float)
    denom = _dot(grad_prev, grad_prev, weights)
    if denom == 0:
        raise GradientVanished("previous gradient is zero")
    return _dot(grad_k, grad_k - grad_prev, weights) / denom


def fr_beta(gamma_k: float, gamma_prev: float) -> float:
    """Fletcher-Reeves ratio ``gamma_k / gamma_prev`` of squared gradient norms."""
    if gamma_prev == 0:
        raise GradientVanished("previous gradient is zero")
    return gamma_k / gamma_prev


@dataclass(frozen=True)
class LineSearchResult:
    alpha: float
    g: np.ndarray
    value: float
    state: object
    backtracks: int
    direction: np.ndarray
    restarted: bool


def armijo_search(fun, g, d, grad, value, params: ArmijoParams = ArmijoParams(),
                  restart_on_nondescent=True, steepest=None, project_nonnegative=False):
    """Backtracking search over ``s, s rho, s rho^2, ...``.

    Accepts the first trial ``alpha`` with
    ``value - J(g + alpha d) >= -alpha mu grad . d`` and a strict decrease.

    Parameters
    ----------
    fun : callable
        ``fun(g) -> (J, state)``.
    g, d, grad : ndarray
        Current point, search direction, Euclidean gradient at ``g``.
    value : float
        ``J(g)``.
    steepest : ndarray, optional
        Direction used when ``d`` is not a descent direction; ``-grad`` by default.
    project_nonnegative : bool
        Clamp trial points to ``g >= 0``; the decrease test then uses the
        actual step ``P(g + alpha d) - g``.

    Raises
    ------
    LineSearchFailed
        If no trial within ``params.max_backtracks`` reductions is accepted.
    """
    g = np.asarray(g, dtype=float)
    d = np.asarray(d, dtype=float)
    grad = np.asarray(grad, dtype=float)
    restarted = False
    if restart_on_nondescent and not np.dot(grad, d) < 0:
        d = -grad if steepest is None else np.asarray(steepest, dtype=float)
        restarted = True
    slope = float(np.dot(grad, d))

    alpha = params.s
    alphas, values = [], []
    for m in range(params.max_backtracks + 1):
        trial = g + alpha * d
        if project_nonnegative:
            trial = np.maximum(trial, 0.0)
            required = -params.mu * float(np.dot(grad, trial - g))
        else:
            required = -alpha * params.mu * slope
        J_trial, state = fun(trial)
        alphas.append(alpha)
        values.append(J_trial)
        if J_trial < value and value - J_trial >= required:
            return LineSearchResult(alpha, trial, J_trial, state, m, d, restarted)
        alpha *= params.rho
    raise LineSearchFailed(
        f"no sufficient decrease after {params.max_backtracks} backtracks "
        f"(J = {value:.6e}, slope = {slope:.3e})", alphas, values)


def minimize(objective, g0, config: OptimizerConfig = OptimizerConfig()) -> RunReport:
    """Run conjugate gradient on ``objective`` from ``g0``.

    ``objective`` provides ``evaluate(g) -> state`` (with attribute ``J``),
    ``gradient(state) -> ndarray`` (Euclidean) and ``metric_weights``.
    Stops when ``J <= stop_J``, ``|grad|_2 <= stop_grad``, after
    ``max_iters`` updates, or when the line search fails.
    """
    t0 = time.perf_counter()
    g = np.array(g0, dtype=float)
    if not np.isfinite(g).all():
        raise ValueError("g0 has non-finite entries")
    if config.project_nonnegative:
        g = np.maximum(g, 0.0)
    weights = objective.metric_weights if config.metric is Metric.L2 else None

    def fun(x):
        s = objective.evaluate(x)
        return s.J, s

    def representer(grad):
        return grad if weights is None else grad / weights

    state = objective.evaluate(g)
    grad = objective.gradient(state)
    records = [IterationRecord(0, state.J, float(np.linalg.norm(grad)))]
    grad_prev = d_prev = None
    termination = None
    message = ""

    while True:
        rec = records[-1]
        if abs(rec.J) <= config.stop_J:
            termination = Termination.J_BELOW_TOL
            break
        if rec.grad_norm <= config.stop_grad:
            termination = Termination.GRAD_BELOW_TOL
            break
        if rec.k >= config.max_iters:
            termination = Termination.MAX_ITERS
            break

        steepest = -representer(grad)
        if d_prev is None:
            beta, d = 0.0, steepest
        else:
            try:
                if config.beta_rule is BetaRule.PRP:
                    beta = prp_beta(grad, grad_prev, weights)
                else:
                    beta = fr_beta(_dot(grad, grad, weights), _dot(grad_prev, grad_prev, weights))
            except GradientVanished as exc:
                termination, message = Termination.GRAD_BELOW_TOL, str(exc)
                break
            d = steepest + beta * d_prev

        try:
            ls = armijo_search(fun, g, d, grad, state.J, config.armijo,
                               restart_on_nondescent=config.restart_on_nondescent,
                               steepest=steepest, project_nonnegative=config.project_nonnegative)
        except LineSearchFailed as exc:
            termination, message = Termination.LINE_SEARCH_FAILED, str(exc)
            break
        if ls.restarted:
            beta = 0.0

        grad_prev, d_prev = grad, ls.direction
        g, state = ls.g, ls.state
        grad = objective.gradient(state)
        records.append(IterationRecord(
            rec.k + 1, state.J, float(np.linalg.norm(grad)), ls.alpha, beta,
            ls.backtracks, ls.restarted))
        logger.debug("k=%d J=%.6e |grad|=%.3e alpha=%.3g beta=%.3g bt=%d",
                     rec.k + 1, state.J, records[-1].grad_norm, ls.alpha, beta, ls.backtracks)

    elapsed = time.perf_counter() - t0
    logger.info("%s after %d iterations, J = %.3e (%.2fs)",
                termination.value, len(records) - 1, records[-1].J, elapsed)
    return RunReport(records=records, termination=termination, g=g,
                     u=getattr(state, "u", None), wall_time=elapsed, state=state, message=message)
