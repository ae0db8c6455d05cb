"""Model selection: information criteria, best-subset search, pruning, sweeps.

The multiple-regression path fits every non-empty subset of the term
catalog, keeps the lowest-loss subset of each size, and compares sizes by
an information criterion.  The network path trains all terms at once and
prunes those whose energy contribution over the training controls stays
negligible.  A sweep utility re-runs the network path over grids of L1/L2
penalty weights.
"""

import itertools
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .data import Dataset
from .energy import ModelSpec, term_kind, term_value
from .exceptions import DiscoveryError, DomainError, FitError
from .fit import (
    AdamConfig,
    FitConfig,
    FitResult,
    _fit_kinds,
    _normalize_subset,
    _Problem,
    adam_fit,
    evaluate_model,
)
from .kinematics import LoadingMode

__all__ = [
    "SelectionCriterion",
    "criterion_value",
    "SubsetRecord",
    "ContributionSeries",
    "DiscoveryResult",
    "best_subset_discover",
    "nn_discover",
    "SweepRow",
    "hyperparameter_sweep",
    "l1_grid",
    "l2_grid",
    "elastic_grid",
    "contribution_table",
]

# A fit whose RSS is below ``n * (RSS_EXACT_RTOL * max|obs|)^2`` is treated
# as an exact interpolation: its log-criteria collapse to -inf and adjusted
# R-squared to exactly 1, so ties resolve by model size rather than by
# which subset's rounding dust happens to be smallest.
RSS_EXACT_RTOL = 1e-10

# Iteration cap applied to each candidate fit during the exhaustive sweep.
# Competitive subsets converge far below this cap; the cap only curtails
# degenerate fits that creep along a flat valley (for example an
# exponential term imitating a linear one as its inner coefficient falls
# toward zero), whose extra digits cannot change the ranking.  Single-subset
# fits via ``fit_subset`` are unaffected.
SCREEN_MAX_ITER = 150


class SelectionCriterion(Enum):
    BIC = "bic"
    AIC = "aic"
    AICC = "aicc"
    ADJUSTED_R2 = "adjr2"

    @property
    def higher_is_better(self) -> bool:
        return self is SelectionCriterion.ADJUSTED_R2


def criterion_value(criterion: SelectionCriterion, n: int, rss: float, m: int,
                    r2: float | None = None) -> float:
    """Score of one fitted subset under an information criterion.

    BIC = N ln(RSS/N) + ln(N) m;  AIC = N ln(RSS/N) + 2m;
    AICc = AIC + 2m(m+1)/(N-m-1);  AdjR2 = 1 - (1-R2)(N-1)/(N-m-1).

    An exactly zero RSS maps the log-based criteria to -inf by convention.

    Raises
    ------
    DomainError
        If N < 2, RSS < 0, m < 0, the criterion's N - m - 1 > 0 constraint
        fails, or adjusted R-squared is requested without an R2 value.
    """
    if n < 2:
        raise DomainError("criterion sample size must be at least 2")
    if rss < 0.0 or m < 0:
        raise DomainError("RSS must be >= 0 and m >= 0")
    if criterion is SelectionCriterion.ADJUSTED_R2:
        if r2 is None:
            raise DomainError("adjusted R-squared requires an R2 value")
        if n - m - 1 <= 0:
            raise DomainError("adjusted R-squared requires N - m - 1 > 0")
        return 1.0 - (1.0 - r2) * (n - 1) / (n - m - 1)
    if criterion is SelectionCriterion.AICC and n - m - 1 <= 0:
        raise DomainError("AICc requires N - m - 1 > 0")
    if rss == 0.0:
        return -np.inf
    base = n * float(np.log(rss / n))
    if criterion is SelectionCriterion.BIC:
        return base + float(np.log(n)) * m
    aic = base + 2.0 * m
    if criterion is SelectionCriterion.AIC:
        return aic
    return aic + 2.0 * m * (m + 1) / (n - m - 1)


def _score_for_ordering(criterion: SelectionCriterion, value: float) -> float:
    return -value if criterion.higher_is_better else value


@dataclass(frozen=True)
class SubsetRecord:
    """One row of the ranking table: a subset and how its best fit scored."""

    subset: tuple[int, ...]
    rank_index: int
    fit: FitResult | None
    score: float | None
    error: str | None = None


@dataclass(frozen=True)
class ContributionSeries:
    """Per-term energy contributions along one mode's training controls.

    ``fractions`` has one row per control and twelve columns (canonical
    term order); rows at zero total energy are all zero, otherwise they
    sum to one.
    """

    mode: LoadingMode
    controls: np.ndarray
    total_energy: np.ndarray
    fractions: np.ndarray


@dataclass(frozen=True)
class DiscoveryResult:
    """Outcome of a model search, for either path.

    The regression path fills ``per_size`` (best record per subset size)
    and ``ranking`` (every attempted subset, best first); the network path
    instead carries the unpruned ``full_fit``.
    """

    method: str
    best: FitResult
    best_subset: tuple[int, ...]
    contributions: tuple[ContributionSeries, ...]
    criterion: SelectionCriterion | None = None
    per_size: dict[int, SubsetRecord] | None = None
    ranking: tuple[SubsetRecord, ...] = ()
    full_fit: FitResult | None = None
    warnings: tuple[str, ...] = ()


def _invariant_arrays(series):
    c = series.controls
    if series.mode is LoadingMode.SHEAR:
        i = 3.0 + c * c
        return i, i
    return c * c + 2.0 / c, 2.0 * c + 1.0 / (c * c)


def contribution_table(model: ModelSpec, dataset: Dataset) -> tuple[ContributionSeries, ...]:
    """Per-term energy shares of a model along each training series."""
    table = []
    for series in dataset.series:
        i1, i2 = _invariant_arrays(series)
        values = np.zeros((len(series), 12))
        for kind, params in model.terms:
            values[:, kind.index - 1] = np.asarray(
                term_value(kind, params, i1, i2), dtype=float)
        total = values.sum(axis=1)
        fractions = np.zeros_like(values)
        positive = total > 0.0
        fractions[positive] = values[positive] / total[positive, None]
        table.append(ContributionSeries(
            mode=series.mode, controls=series.controls.copy(),
            total_energy=total, fractions=fractions))
    return tuple(table)


def _exact_rss_floor(dataset: Dataset) -> float:
    scale = float(np.max(np.abs(dataset.all_stresses()), initial=0.0))
    return dataset.n_points * (RSS_EXACT_RTOL * scale) ** 2


def _record_score(criterion, fit: FitResult, exact_floor: float) -> float:
    exact = fit.rss <= exact_floor
    return criterion_value(
        criterion, fit.n_points, 0.0 if exact else fit.rss,
        fit.n_parameters, 1.0 if exact else fit.r2)


def best_subset_discover(dataset: Dataset, criterion: SelectionCriterion,
                         config: FitConfig = FitConfig(),
                         catalog=None) -> DiscoveryResult:
    """Exhaustive best-subset search over the term catalog.

    Fits every non-empty subset, keeps the lowest-loss subset of each size,
    scores the per-size bests with the criterion and returns the global
    optimum.  Ties resolve to fewer terms, then to the lower lexicographic
    subset.  Individual fit failures are recorded and skipped.  Candidate
    fits run under the ``SCREEN_MAX_ITER`` iteration cap (or the configured
    cap if lower), which leaves converging fits untouched and curtails only
    degenerate flat-valley creep.

    Raises
    ------
    DiscoveryError
        If no subset could be fitted at all.
    """
    indices = tuple(sorted({term_kind(int(i)).index for i in (
        catalog if catalog is not None else range(1, 13))}))
    if not indices:
        raise DomainError("catalog must contain at least one term")
    screen = (config if config.max_iter <= SCREEN_MAX_ITER
              else replace(config, max_iter=SCREEN_MAX_ITER))
    problem = _Problem(dataset)
    exact_floor = _exact_rss_floor(dataset)
    records: list[SubsetRecord] = []
    rank_index = 0
    for size in range(1, len(indices) + 1):
        for subset in itertools.combinations(indices, size):
            try:
                fit = _fit_kinds(problem, _normalize_subset(subset), screen)
                score = _record_score(criterion, fit, exact_floor)
                records.append(SubsetRecord(subset, rank_index, fit, score))
            except (FitError, DomainError) as exc:
                records.append(SubsetRecord(subset, rank_index, None, None, str(exc)))
            rank_index += 1
    fitted = [r for r in records if r.fit is not None]
    if not fitted:
        raise DiscoveryError("every candidate subset failed to fit")

    per_size: dict[int, SubsetRecord] = {}
    for record in fitted:
        size = len(record.subset)
        incumbent = per_size.get(size)
        if incumbent is None or (
                (record.fit.total_mape, record.rank_index)
                < (incumbent.fit.total_mape, incumbent.rank_index)):
            per_size[size] = record

    scored = [r for r in per_size.values() if r.score is not None]
    if not scored:
        raise DiscoveryError("no per-size best admits the requested criterion")
    winner = min(scored, key=lambda r: (
        _score_for_ordering(criterion, r.score), len(r.subset), r.rank_index))

    ranking = tuple(sorted(
        records,
        key=lambda r: ((0, _score_for_ordering(criterion, r.score))
                       if r.score is not None else (1, 0.0),
                       len(r.subset), r.rank_index)))
    return DiscoveryResult(
        method="mr",
        best=winner.fit,
        best_subset=winner.subset,
        contributions=contribution_table(winner.fit.model, dataset),
        criterion=criterion,
        per_size=per_size,
        ranking=ranking,
    )


def _prune(full: FitResult, dataset: Dataset, prune_threshold: float,
           prune_on: str) -> tuple[ModelSpec, tuple[str, ...]]:
    if prune_on not in ("energy", "weight"):
        raise DomainError(f"prune_on must be 'energy' or 'weight', got {prune_on!r}")
    notes: list[str] = []
    survivors: dict[int, object] = {}
    if prune_on == "weight":
        for kind, params in full.model.terms:
            if params.outer > 0.0 and params.outer >= prune_threshold:
                survivors[kind.index] = params
    else:
        peak = np.zeros(12)
        max_total = 0.0
        for contrib in contribution_table(full.model, dataset):
            per_term = contrib.fractions * contrib.total_energy[:, None]
            peak = np.maximum(peak, per_term.max(axis=0, initial=0.0))
            max_total = max(max_total, float(np.max(contrib.total_energy,
                                                    initial=0.0)))
        if max_total <= 0.0:
            notes.append("model stores no energy on the training controls; "
                         "all terms pruned")
        else:
            for kind, params in full.model.terms:
                term_peak = peak[kind.index - 1]
                if term_peak > 0.0 and term_peak >= prune_threshold * max_total:
                    survivors[kind.index] = params
    model = ModelSpec(survivors)
    if len(model) == 0 and not notes:
        notes.append("all terms pruned")
    return model, tuple(notes)


def nn_discover(dataset: Dataset, config: AdamConfig = AdamConfig(),
                prune_threshold: float = 1e-3,
                prune_on: str = "energy") -> DiscoveryResult:
    """Network-path discovery: train all terms, then prune negligible ones.

    A term survives when its peak energy contribution over the training
    controls reaches ``prune_threshold`` times the peak total energy
    (``prune_on='energy'``), or when its outer weight reaches the
    threshold in kPa (``prune_on='weight'``).  Terms that contribute
    nothing at all are always dropped, even at threshold zero.  The
    pruned model is
    re-evaluated on the training data but not refitted.  An all-pruned
    model is reported with a warning, not an error.
    """
    if prune_threshold < 0.0:
        raise DomainError("prune threshold must be >= 0")
    full = adam_fit(dataset, config)
    pruned_model, notes = _prune(full, dataset, prune_threshold, prune_on)
    pruned = evaluate_model(dataset, pruned_model,
                            converged=full.converged, restart_index=0)
    return DiscoveryResult(
        method="nn",
        best=pruned,
        best_subset=pruned_model.indices,
        contributions=contribution_table(pruned_model, dataset),
        full_fit=full,
        warnings=notes,
    )


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a regularization sweep."""

    alpha1: float
    alpha2: float
    n_terms: int | None
    mode_r2: dict[LoadingMode, float] | None
    model: ModelSpec | None
    total_mape: float | None
    error: str | None = None


def l1_grid(values=(0.0, 0.01, 0.1, 1.0)) -> tuple[tuple[float, float], ...]:
    return tuple((float(a), 0.0) for a in values)


def l2_grid(values=(0.0, 0.01, 0.1, 1.0)) -> tuple[tuple[float, float], ...]:
    return tuple((0.0, float(a)) for a in values)


def elastic_grid(values=(0.0, 0.01, 0.1, 1.0)) -> tuple[tuple[float, float], ...]:
    return tuple((float(a), float(a)) for a in values)


def hyperparameter_sweep(dataset: Dataset, grid,
                         config: AdamConfig = AdamConfig(),
                         prune_threshold: float = 1e-3) -> tuple[SweepRow, ...]:
    """One network-path discovery per (alpha1, alpha2) grid point.

    Rows keep the grid's order; per-point failures are recorded in the row
    rather than raised.
    """
    points = [(float(a1), float(a2)) for a1, a2 in grid]
    if not points:
        raise DomainError("sweep grid must be non-empty")
    rows = []
    for alpha1, alpha2 in points:
        point_config = replace(config, alpha1=alpha1, alpha2=alpha2)
        try:
            result = nn_discover(dataset, point_config, prune_threshold)
            rows.append(SweepRow(
                alpha1=alpha1, alpha2=alpha2,
                n_terms=len(result.best.model),
                mode_r2=dict(result.best.mode_r2),
                model=result.best.model,
                total_mape=result.best.total_mape))
        except FitError as exc:
            rows.append(SweepRow(alpha1, alpha2, None, None, None, None, str(exc)))
    return tuple(rows)
