"""Percentage losses, goodness-of-fit metrics, and the two fitting engines.

The subset fitter minimises the pooled sum of squared percentage residuals
r_i = 100 (obs_i - pred_i) / obs_i with a damped Gauss-Newton iteration
(Levenberg-Marquardt style) under box constraints: every coefficient is
non-negative and log-term inner coefficients stay inside the feasibility
box derived from the data's invariant range.  The network-path trainer
minimises total MAPE plus L1/L2 penalties with a plain adaptive-gradient
(Adam) loop, projecting onto the same box after every step.

Observed stresses with magnitude below ``DENOMINATOR_FLOOR`` are excluded
from percentage losses only; residual sums of squares and R-squared always
use every point.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset, invariant_extrema
from .energy import (
    CATALOG,
    Activation,
    ModelSpec,
    TermKind,
    TermParams,
    log_inner_limit,
    term_kind,
)
from .exceptions import DegenerateDataError, DomainError, FitError
from .kinematics import LoadingMode

__all__ = [
    "DENOMINATOR_FLOOR",
    "FitConfig",
    "AdamConfig",
    "FitResult",
    "mape_loss",
    "multi_mode_loss",
    "rss",
    "r_squared",
    "fit_subset",
    "adam_fit",
    "evaluate_model",
]

# Observed stresses below this magnitude (kPa) are excluded from
# percentage losses to avoid division by zero.
DENOMINATOR_FLOOR = 1e-8

# Exponential inner coefficients are capped so exp(a * u) cannot overflow
# during training; the cap is far above any data-supported optimum.
_EXP_ARG_CAP = 500.0

# Fitted log inner coefficients stay strictly inside the feasibility limit.
_BOX_SHRINK = 1.0 - 1e-9


@dataclass(frozen=True)
class FitConfig:
    """Settings of the multi-restart damped Gauss-Newton subset fitter."""

    restarts: int = 8
    seed: int = 0
    max_iter: int = 2000
    param_tol: float = 1e-10
    loss_tol: float = 1e-12
    outer_init: tuple[float, float] = (1e-3, 1e1)
    inner_init: tuple[float, float] = (1e-2, 1e2)

    def __post_init__(self):
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if not (self.param_tol > 0.0 and self.loss_tol > 0.0):
            raise DomainError("tolerances must be positive")
        for low, high in (self.outer_init, self.inner_init):
            if not (0.0 < low <= high):
                raise DomainError("init ranges must satisfy 0 < low <= high")


@dataclass(frozen=True)
class AdamConfig:
    """Settings of the regularised adaptive-gradient trainer."""

    alpha1: float = 0.0
    alpha2: float = 0.0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 20000
    seed: int = 0

    def __post_init__(self):
        if self.alpha1 < 0.0 or self.alpha2 < 0.0:
            raise DomainError("penalty weights must be >= 0")
        if self.learning_rate <= 0.0:
            raise DomainError("learning rate must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise DomainError("decay parameters must lie in [0, 1)")
        if self.epsilon <= 0.0 or self.epochs < 1:
            raise DomainError("epsilon must be positive and epochs >= 1")


@dataclass(frozen=True)
class FitResult:
    """Outcome of one fit: the model plus its training metrics.

    ``mode_mape`` maps each present mode to its mean absolute percentage
    error; ``total_mape`` is their sum.  ``rss`` pools all points in kPa^2.
    ``mode_r2`` holds raw (possibly negative) coefficients of determination
    with floored-at-zero copies in ``mode_r2_floored``; ``r2`` pools all
    points.  ``n_parameters`` counts one coefficient per term plus one per
    nonlinear term.
    """

    model: ModelSpec
    mode_mape: dict[LoadingMode, float]
    total_mape: float
    rss: float
    mode_r2: dict[LoadingMode, float]
    mode_r2_floored: dict[LoadingMode, float]
    r2: float
    n_parameters: int
    n_points: int
    converged: bool
    restart_index: int


# ---------------------------------------------------------------------------
# Losses and metrics.

def _paired(pred, obs):
    p = np.asarray(pred, dtype=float)
    o = np.asarray(obs, dtype=float)
    if p.shape != o.shape or p.ndim != 1:
        raise DomainError("pred and obs must be equal-length 1-d arrays")
    return p, o


def mape_loss(pred, obs) -> float:
    """Mean absolute percentage error over included points, in percent.

    Points with ``|obs| < DENOMINATOR_FLOOR`` are excluded; the mean is
    taken over the included count.
    """
    p, o = _paired(pred, obs)
    include = np.abs(o) >= DENOMINATOR_FLOOR
    if not include.any():
        raise DegenerateDataError(
            "percentage loss undefined: every observed stress is below "
            f"{DENOMINATOR_FLOOR} kPa")
    return float(100.0 * np.mean(np.abs((o[include] - p[include]) / o[include])))


def multi_mode_loss(per_mode_losses) -> float:
    """Total loss: the plain sum of per-mode losses (absent modes add 0)."""
    if isinstance(per_mode_losses, dict):
        values = list(per_mode_losses.values())
    else:
        values = list(per_mode_losses)
    return float(sum(values))


def rss(pred, obs) -> float:
    """Residual sum of squares over all points, in kPa^2."""
    p, o = _paired(pred, obs)
    return float(np.sum((o - p) ** 2))


def r_squared(pred, obs) -> float:
    """Coefficient of determination on signed stresses.

    Raises
    ------
    DegenerateDataError
        If the observations are constant (zero total sum of squares).
    """
    p, o = _paired(pred, obs)
    if len(o) < 2:
        raise DomainError("R-squared needs at least 2 points")
    tss = float(np.sum((o - o.mean()) ** 2))
    if tss == 0.0:
        raise DegenerateDataError("R-squared undefined for a constant series")
    return 1.0 - rss(p, o) / tss


# ---------------------------------------------------------------------------
# Vectorised evaluation over one dataset.

class _Problem:
    """Precomputed per-point geometry for fast stress/Jacobian evaluation.

    For every data point the nominal stress of any catalog model is
    ``fac1 * dPsi/dI1 + fac2 * dPsi/dI2`` where the factors depend only on
    the loading geometry: uniaxial points have fac1 = 2 (lam - lam^-2) and
    fac2 = fac1 / lam, shear points fac1 = fac2 = 2 gamma.
    """

    def __init__(self, dataset: Dataset):
        x1_parts, x2_parts, f1_parts, f2_parts, obs_parts = [], [], [], [], []
        self.mode_slices: dict[LoadingMode, slice] = {}
        start = 0
        for series in dataset.series:
            c = series.controls
            if series.mode is LoadingMode.SHEAR:
                x = c * c
                fac = 2.0 * c
                x1_parts.append(x)
                x2_parts.append(x)
                f1_parts.append(fac)
                f2_parts.append(fac)
            else:
                x1_parts.append(np.maximum(c * c + 2.0 / c - 3.0, 0.0))
                x2_parts.append(np.maximum(2.0 * c + 1.0 / (c * c) - 3.0, 0.0))
                fac = 2.0 * (c - 1.0 / (c * c))
                f1_parts.append(fac)
                f2_parts.append(fac / c)
            obs_parts.append(series.stresses)
            self.mode_slices[series.mode] = slice(start, start + len(series))
            start += len(series)
        self.x = {1: np.concatenate(x1_parts), 2: np.concatenate(x2_parts)}
        self.fac = {1: np.concatenate(f1_parts), 2: np.concatenate(f2_parts)}
        self.obs = np.concatenate(obs_parts)
        self.include = np.abs(self.obs) >= DENOMINATOR_FLOOR
        self.n_points = len(self.obs)
        self.n_included = int(self.include.sum())
        self.obs_inc = self.obs[self.include]
        # Residuals are percentages of the observed stress.
        self.weight = np.divide(100.0, self.obs_inc,
                                out=np.zeros_like(self.obs_inc),
                                where=self.obs_inc != 0.0)
        self.x1_max, self.x2_max = invariant_extrema(dataset)
        self._static: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._static_inc: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _columns(self, kind: TermKind) -> tuple[np.ndarray, np.ndarray]:
        """Static arrays of one term: (u, base) with u = x^p and
        base = fac * p * x^(p-1), so the stress contribution is the
        activation derivative times base."""
        cached = self._static.get(kind.index)
        if cached is not None:
            return cached
        x = self.x[kind.invariant]
        fac = self.fac[kind.invariant]
        if kind.power == 1:
            u, base = x, fac
        else:
            u, base = x * x, fac * (2.0 * x)
        self._static[kind.index] = (u, base)
        return (u, base)

    def _columns_inc(self, kind: TermKind) -> tuple[np.ndarray, np.ndarray]:
        """Same as ``_columns`` but restricted to included points."""
        cached = self._static_inc.get(kind.index)
        if cached is not None:
            return cached
        u, base = self._columns(kind)
        pair = (u[self.include], base[self.include])
        self._static_inc[kind.index] = pair
        return pair

    def n_free(self, kinds) -> int:
        return sum(1 if k.is_linear else 2 for k in kinds)

    def bounds(self, kinds, exp_cap: bool = False):
        """Box constraints for the packed parameter vector of ``kinds``."""
        lo = np.zeros(self.n_free(kinds))
        hi = np.full_like(lo, np.inf)
        position = 0
        for kind in kinds:
            position += 1
            if kind.is_linear:
                continue
            if kind.activation is Activation.LOGARITHMIC:
                limit = log_inner_limit(kind, self.x1_max, self.x2_max)
                hi[position] = limit * _BOX_SHRINK if np.isfinite(limit) else np.inf
            elif exp_cap:
                u_max = self.x1_max if kind.invariant == 1 else self.x2_max
                if kind.power == 2:
                    u_max = u_max * u_max
                if u_max > 0.0:
                    hi[position] = _EXP_ARG_CAP / u_max
            position += 1
        return lo, hi

    def predict(self, kinds, theta: np.ndarray) -> np.ndarray:
        """Stresses at all points; may contain inf under overflow."""
        pred = np.zeros(self.n_points)
        position = 0
        with np.errstate(over="ignore", invalid="ignore"):
            for kind in kinds:
                u, base = self._columns(kind)
                b = theta[position]
                position += 1
                if kind.is_linear:
                    pred += b * base
                    continue
                a = theta[position]
                position += 1
                if kind.activation is Activation.EXPONENTIAL:
                    pred += (b * a) * (base * np.exp(a * u))
                else:
                    pred += (b * a) * (base / (1.0 - a * u))
        return pred

    def predict_jac(self, kinds, theta: np.ndarray):
        """Stresses plus the Jacobian d pred / d theta, shape (n, n_free)."""
        pred = np.zeros(self.n_points)
        jac = np.empty((self.n_points, self.n_free(kinds)))
        position = 0
        with np.errstate(over="ignore", invalid="ignore"):
            for kind in kinds:
                u, base = self._columns(kind)
                b = theta[position]
                if kind.is_linear:
                    jac[:, position] = base
                    pred += b * base
                    position += 1
                    continue
                a = theta[position + 1]
                if kind.activation is Activation.EXPONENTIAL:
                    grow = base * np.exp(a * u)
                    jac[:, position] = a * grow
                    jac[:, position + 1] = b * grow * (1.0 + a * u)
                    pred += (b * a) * grow
                else:
                    damp = 1.0 - a * u
                    jac[:, position] = a * base / damp
                    jac[:, position + 1] = b * base / (damp * damp)
                    pred += (b * a) * (base / damp)
                position += 2
        return pred, jac

    def predict_batch(self, kinds, thetas: np.ndarray) -> np.ndarray:
        """Stresses at included points for a stack of parameter vectors.

        ``thetas`` has shape (stack, n_free); the result (stack, n_included)
        may contain non-finite entries under overflow, which callers treat
        as a rejected trial.
        """
        pred = np.zeros((thetas.shape[0], self.n_included))
        position = 0
        with np.errstate(over="ignore", invalid="ignore"):
            for kind in kinds:
                u, base = self._columns_inc(kind)
                b = thetas[:, position:position + 1]
                position += 1
                if kind.is_linear:
                    pred += b * base
                    continue
                a = thetas[:, position:position + 1]
                position += 1
                if kind.activation is Activation.EXPONENTIAL:
                    pred += (b * a) * (base * np.exp(a * u))
                else:
                    pred += (b * a) * (base / (1.0 - a * u))
        return pred

    def jac_batch(self, kinds, thetas: np.ndarray):
        """Included-point stresses plus Jacobians for stacked parameters.

        Returns (pred (stack, n_included), jac (stack, n_included, n_free)).
        """
        stack = thetas.shape[0]
        pred = np.zeros((stack, self.n_included))
        jac = np.empty((stack, self.n_included, self.n_free(kinds)))
        position = 0
        with np.errstate(over="ignore", invalid="ignore"):
            for kind in kinds:
                u, base = self._columns_inc(kind)
                b = thetas[:, position:position + 1]
                if kind.is_linear:
                    jac[:, :, position] = base
                    pred += b * base
                    position += 1
                    continue
                a = thetas[:, position + 1:position + 2]
                if kind.activation is Activation.EXPONENTIAL:
                    grow = base * np.exp(a * u)
                    jac[:, :, position] = a * grow
                    jac[:, :, position + 1] = b * grow * (1.0 + a * u)
                    pred += (b * a) * grow
                else:
                    damp = 1.0 - a * u
                    jac[:, :, position] = a * base / damp
                    jac[:, :, position + 1] = b * base / (damp * damp)
                    pred += (b * a) * (base / damp)
                position += 2
        return pred, jac

    def percentage_residuals(self, pred: np.ndarray) -> np.ndarray:
        obs = self.obs[self.include]
        return 100.0 * (obs - pred[self.include]) / obs

    def mode_mapes(self, pred: np.ndarray) -> dict[LoadingMode, float]:
        """Per-mode MAPE; a mode with no included points contributes 0."""
        out = {}
        for mode, window in self.mode_slices.items():
            inc = self.include[window]
            if not inc.any():
                out[mode] = 0.0
                continue
            obs = self.obs[window][inc]
            out[mode] = float(
                100.0 * np.mean(np.abs((obs - pred[window][inc]) / obs)))
        return out

    def metrics(self, model: ModelSpec, pred: np.ndarray,
                converged: bool, restart_index: int) -> FitResult:
        mode_mape = self.mode_mapes(pred)
        mode_r2 = {}
        for mode, window in self.mode_slices.items():
            mode_r2[mode] = r_squared(pred[window], self.obs[window])
        return FitResult(
            model=model,
            mode_mape=mode_mape,
            total_mape=multi_mode_loss(mode_mape),
            rss=rss(pred, self.obs),
            mode_r2=mode_r2,
            mode_r2_floored={m: max(0.0, v) for m, v in mode_r2.items()},
            r2=r_squared(pred, self.obs),
            n_parameters=model.n_parameters,
            n_points=self.n_points,
            converged=converged,
            restart_index=restart_index,
        )


def _normalize_subset(subset) -> tuple[TermKind, ...]:
    kinds = []
    for entry in subset:
        kinds.append(entry if isinstance(entry, TermKind) else term_kind(int(entry)))
    unique = sorted({k.index for k in kinds})
    if not unique:
        raise DomainError("term subset must be non-empty")
    return tuple(term_kind(i) for i in unique)


def _theta_to_model(kinds, theta: np.ndarray) -> ModelSpec:
    terms = {}
    position = 0
    for kind in kinds:
        outer = float(theta[position])
        position += 1
        if kind.is_linear:
            terms[kind.index] = TermParams(outer)
        else:
            terms[kind.index] = TermParams(outer, float(theta[position]))
            position += 1
    return ModelSpec(terms)


# ---------------------------------------------------------------------------
# Damped Gauss-Newton with box projection (multiple-regression path).

def _projected_gradient(theta, gradient, lo, hi) -> np.ndarray:
    pg = gradient.copy()
    at_lo = theta <= lo
    at_hi = theta >= hi
    pg[at_lo] = np.minimum(pg[at_lo], 0.0)
    pg[at_hi] = np.maximum(pg[at_hi], 0.0)
    return pg


# Damping ladder chunk scanned per normal-equations factorisation, and the
# damping range of the trust region.
_LADDER = 4.0 ** np.arange(4)
_DAMPING_MIN = 1e-12
_DAMPING_MAX = 1e15

# A restart whose summed squared percentage residuals fall below this value
# per included point has fit the data to machine precision; the remaining
# restarts are abandoned because they can no longer change the winner.
_EXACT_LOSS_PER_POINT = 1e-20


def _lm_batch(problem: _Problem, kinds, theta0s: np.ndarray,
              config: FitConfig):
    """Advance every restart of one subset together.

    Each outer iteration forms the damped normal equations of all still-live
    restarts at once, then scans the damping ladder in chunks; every restart
    accepts the first strictly loss-decreasing candidate in ascending
    damping order, which is the same decision sequence a one-restart-at-a-
    time loop would make.  A restart finishes when an accepted step trips
    the loss or parameter tolerance (converged), when no damping up to the
    cap yields a decrease (converged exactly when the projected gradient is
    small), or at the iteration cap (not converged).

    Returns ``(thetas (R, m), losses (R,), converged (R,) bools)``.
    """
    lo, hi = problem.bounds(kinds)
    m = problem.n_free(kinds)
    theta = np.clip(np.asarray(theta0s, dtype=float), lo, hi)
    restarts = theta.shape[0]
    obs = problem.obs_inc
    w = problem.weight
    exact_tol = problem.n_included * _EXACT_LOSS_PER_POINT
    diag = np.arange(m)

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        resid = w * (obs - problem.predict_batch(kinds, theta))
        loss = np.einsum("rn,rn->r", resid, resid)
        live = np.isfinite(loss)
        loss = np.where(live, loss, np.inf)
        converged = np.zeros(restarts, dtype=bool)
        damping = np.full(restarts, 1e-3)

        for _ in range(config.max_iter):
            if not live.any():
                break
            idx = np.flatnonzero(live)
            th = theta[idx]
            pred, jac = problem.jac_batch(kinds, th)
            rjac = -w[None, :, None] * jac
            r = w * (obs - pred)
            grad = np.einsum("lnm,ln->lm", rjac, r)
            hess = np.einsum("lnm,lnk->lmk", rjac, rjac)
            scale = hess[:, diag, diag].copy()
            np.maximum(scale, 1e-12, out=scale)
            usable = (np.isfinite(grad).all(axis=1)
                      & np.isfinite(hess).all(axis=(1, 2)))
            cur = damping[idx].copy()
            pending = usable.copy()
            stepped = np.zeros(len(idx), dtype=bool)
            while pending.any():
                rows = np.flatnonzero(pending)
                lam = cur[rows, None] * _LADDER[None, :]
                valid = lam <= _DAMPING_MAX
                if not valid.any():
                    break
                chunk = len(rows)
                systems = np.broadcast_to(
                    hess[rows][:, None], (chunk, len(_LADDER), m, m)).copy()
                systems[:, :, diag, diag] += (
                    np.minimum(lam, _DAMPING_MAX)[:, :, None]
                    * scale[rows][:, None, :])
                rhs = np.repeat(-grad[rows], len(_LADDER), axis=0)
                try:
                    steps = np.linalg.solve(
                        systems.reshape(-1, m, m), rhs[:, :, None])[:, :, 0]
                except np.linalg.LinAlgError:
                    flat = systems.reshape(-1, m, m)
                    steps = np.empty_like(rhs)
                    for i in range(len(steps)):
                        try:
                            steps[i] = np.linalg.solve(flat[i], rhs[i])
                        except np.linalg.LinAlgError:
                            steps[i] = np.nan
                steps = steps.reshape(chunk, len(_LADDER), m)
                trial = np.clip(th[rows][:, None, :] + steps, lo, hi)
                tr = w * (obs - problem.predict_batch(
                    kinds, trial.reshape(-1, m)))
                tloss = np.einsum("tn,tn->t", tr, tr).reshape(chunk, -1)
                ok = (np.isfinite(tloss) & valid
                      & np.isfinite(steps).all(axis=2)
                      & (tloss < loss[idx[rows], None]))
                any_ok = ok.any(axis=1)
                first = np.argmax(ok, axis=1)
                if any_ok.any():
                    acc = rows[any_ok]
                    slot = first[any_ok]
                    new_theta = trial[any_ok, slot]
                    new_loss = tloss[any_ok, slot]
                    prev = loss[idx[acc]]
                    moved = np.max(np.abs(new_theta - th[acc]), axis=1)
                    theta[idx[acc]] = new_theta
                    loss[idx[acc]] = new_loss
                    damping[idx[acc]] = np.maximum(
                        lam[any_ok, slot] * 0.25, _DAMPING_MIN)
                    stepped[acc] = True
                    pending[acc] = False
                    drop = prev - new_loss
                    done = ((drop <= config.loss_tol
                             * np.maximum(1.0, new_loss))
                            | (moved <= config.param_tol
                               * (1.0 + np.max(np.abs(new_theta), axis=1))))
                    converged[idx[acc[done]]] = True
                    live[idx[acc[done]]] = False
                cur[rows[~any_ok]] *= float(_LADDER[-1] * 4.0)
            nostep = ~stepped
            if nostep.any():
                rows = np.flatnonzero(nostep)
                pg = _projected_gradient(th[rows], grad[rows], lo, hi)
                small = (np.max(np.abs(pg), axis=1, initial=0.0)
                         <= 1e-6 * (1.0 + loss[idx[rows]]))
                converged[idx[rows]] = small & usable[rows]
                live[idx[rows]] = False
            exact = loss <= exact_tol
            if exact.any():
                converged[exact] = True
                break
    return theta, loss, converged


def _draw_start(rng, kinds, config: FitConfig, lo, hi) -> np.ndarray:
    log_lo = np.empty(len(lo))
    log_hi = np.empty(len(lo))
    position = 0
    for kind in kinds:
        log_lo[position] = np.log(config.outer_init[0])
        log_hi[position] = np.log(config.outer_init[1])
        position += 1
        if not kind.is_linear:
            log_lo[position] = np.log(config.inner_init[0])
            log_hi[position] = np.log(config.inner_init[1])
            position += 1
    draw = np.exp(rng.uniform(log_lo, log_hi))
    return np.clip(draw, lo, hi)


def _fit_kinds(problem: _Problem, kinds, config: FitConfig) -> FitResult:
    """Multi-restart fit of one normalized subset on a prepared problem."""
    if problem.n_included == 0:
        raise DegenerateDataError(
            "percentage loss undefined: every observed stress is below "
            f"{DENOMINATOR_FLOOR} kPa")
    lo, hi = problem.bounds(kinds)
    streams = np.random.SeedSequence(config.seed).spawn(config.restarts)
    theta0s = np.stack([
        _draw_start(np.random.default_rng(stream), kinds, config, lo, hi)
        for stream in streams])
    thetas, losses, convergences = _lm_batch(problem, kinds, theta0s, config)
    if not np.isfinite(losses).any():
        raise FitError(
            "all restarts failed for subset "
            f"{tuple(k.index for k in kinds)}: no restart reached a finite "
            "percentage loss")
    index = int(np.argmin(losses))
    theta = thetas[index]
    model = _theta_to_model(kinds, theta)
    pred = problem.predict(kinds, theta)
    return problem.metrics(model, pred, bool(convergences[index]), index)


def fit_subset(dataset: Dataset, subset, config: FitConfig = FitConfig()) -> FitResult:
    """Fit the outer/inner coefficients of a fixed term subset.

    Runs ``config.restarts`` seeded initialisations of the damped
    Gauss-Newton iteration and keeps the lowest final loss, breaking ties
    by restart index.

    Raises
    ------
    FitError
        If every restart fails to produce a finite loss.
    DegenerateDataError
        If no observed stress clears the percentage-loss floor.
    """
    return _fit_kinds(_Problem(dataset), _normalize_subset(subset), config)


def evaluate_model(dataset: Dataset, model: ModelSpec,
                   converged: bool = True, restart_index: int = 0) -> FitResult:
    """Metrics of a fixed model on a dataset, without any fitting.

    The empty model predicts zero stress everywhere.
    """
    problem = _Problem(dataset)
    if problem.n_included == 0:
        raise DegenerateDataError(
            "percentage loss undefined: every observed stress is below "
            f"{DENOMINATOR_FLOOR} kPa")
    if len(model) == 0:
        pred = np.zeros(problem.n_points)
    else:
        kinds = tuple(kind for kind, _ in model.terms)
        theta = []
        for kind, params in model.terms:
            theta.append(params.outer)
            if params.inner is not None:
                theta.append(params.inner)
        pred = problem.predict(kinds, np.asarray(theta, dtype=float))
    return problem.metrics(model, pred, converged, restart_index)


# ---------------------------------------------------------------------------
# Regularised adaptive-gradient trainer (network path).

def _mape_value_grad(problem: _Problem, pred, jac):
    """Total MAPE over modes and its gradient with respect to theta."""
    total = 0.0
    grad = np.zeros(jac.shape[1])
    for window in problem.mode_slices.values():
        inc = problem.include[window]
        if not inc.any():
            continue
        obs = problem.obs[window][inc]
        diff = obs - pred[window][inc]
        weight = 100.0 / len(obs)
        total += weight * float(np.sum(np.abs(diff) / np.abs(obs)))
        coeff = -np.sign(diff) / np.abs(obs)
        grad += weight * (coeff @ jac[window][inc])
    return total, grad


def adam_fit(dataset: Dataset, config: AdamConfig = AdamConfig(),
             callback=None) -> FitResult:
    """Train all 12 catalog terms (20 coefficients) with penalised MAPE.

    Minimises ``total MAPE + alpha1 * ||theta||_1 + alpha2 * ||theta||_2^2``
    over all coefficients by Adam, projecting every coefficient to
    ``max(value, 0)`` after each step and clamping log inner coefficients
    to the feasibility box.  At a coefficient pinned to zero the L1 term
    only re-activates it when the data pull exceeds ``alpha1``, so strongly
    penalised weights stay exactly zero.  Deterministic for a fixed seed.

    ``callback(epoch, theta, loss)``, when given, observes every epoch.
    """
    kinds = CATALOG
    problem = _Problem(dataset)
    if problem.n_included == 0:
        raise DegenerateDataError(
            "percentage loss undefined: every observed stress is below "
            f"{DENOMINATOR_FLOOR} kPa")
    lo, hi = problem.bounds(kinds, exp_cap=True)
    rng = np.random.default_rng(config.seed)
    theta = np.clip(rng.uniform(0.0, 1.0, problem.n_free(kinds)), lo, hi)

    def objective(pred, params):
        data_term = sum(problem.mode_mapes(pred).values())
        return (data_term + config.alpha1 * float(np.sum(params))
                + config.alpha2 * float(params @ params))

    loss = objective(problem.predict(kinds, theta), theta)
    if not np.isfinite(loss):
        raise FitError("non-finite loss at initialization after projection")
    first_moment = np.zeros_like(theta)
    second_moment = np.zeros_like(theta)
    for epoch in range(1, config.epochs + 1):
        pred, jac = problem.predict_jac(kinds, theta)
        _, grad = _mape_value_grad(problem, pred, jac)
        grad += 2.0 * config.alpha2 * theta
        if config.alpha1 > 0.0:
            active = theta > 0.0
            grad[active] += config.alpha1
            pinned = ~active
            lifted = grad[pinned] + config.alpha1
            grad[pinned] = np.minimum(lifted, 0.0)
        first_moment = config.beta1 * first_moment + (1.0 - config.beta1) * grad
        second_moment = (config.beta2 * second_moment
                         + (1.0 - config.beta2) * grad * grad)
        m_hat = first_moment / (1.0 - config.beta1 ** epoch)
        v_hat = second_moment / (1.0 - config.beta2 ** epoch)
        theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
        theta = np.clip(theta, lo, hi)
        if callback is not None:
            loss = objective(problem.predict(kinds, theta), theta)
            callback(epoch, theta.copy(), loss)
    pred = problem.predict(kinds, theta)
    loss = objective(pred, theta)
    model = _theta_to_model(kinds, theta)
    return problem.metrics(model, pred, converged=bool(np.isfinite(loss)),
                           restart_index=0)
