"""Scikit-learn style estimators wrapping the discovery pipelines.

All estimators share one input convention: ``X`` is an (n_samples, 2)
array whose first column is the loading mode (the codes ``"ten"``,
``"com"``, ``"shr"``, a :class:`~hyperdiscovery.kinematics.LoadingMode`,
or the integers 0/1/2 in that order) and whose second column is the
control variable (stretch or amount of shear); ``y`` holds the nominal
stresses in kPa.  A :class:`~hyperdiscovery.data.Dataset` may be passed
directly as ``X`` with ``y=None``.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .data import DataSeries, Dataset, MODE_ORDER, predict_dataset
from .exceptions import DataError, DomainError
from .fit import AdamConfig, FitConfig, fit_subset
from .kinematics import LoadingMode
from .select import best_subset_discover, nn_discover, SelectionCriterion
from .stress import nominal_stress

__all__ = [
    "TermSubsetRegressor",
    "BestSubsetRegressor",
    "ConstitutiveNetworkRegressor",
    "ClassicModelRegressor",
]


def _as_mode(value) -> LoadingMode:
    if isinstance(value, LoadingMode):
        return value
    if isinstance(value, str):
        return LoadingMode.from_code(value.strip())
    number = float(value)
    if number in (0.0, 1.0, 2.0):
        return MODE_ORDER[int(number)]
    raise DomainError(f"cannot interpret {value!r} as a loading mode")


def _check_rows(X) -> list[tuple[LoadingMode, float]]:
    if isinstance(X, Dataset):
        return [(s.mode, float(c)) for s in X.series for c in s.controls]
    rows = np.asarray(X, dtype=object)
    if rows.ndim != 2 or rows.shape[1] != 2:
        raise DomainError(
            f"X must have shape (n_samples, 2), got {np.shape(X)}")
    return [(_as_mode(row[0]), float(row[1])) for row in rows]


def _as_dataset(X, y) -> Dataset:
    """Validation helper: assemble a Dataset from estimator inputs."""
    if isinstance(X, Dataset):
        if y is not None:
            raise DomainError("y must be None when X is already a Dataset")
        return X
    rows = _check_rows(X)
    stresses = np.asarray(y, dtype=float)
    if stresses.ndim != 1 or len(stresses) != len(rows):
        raise DomainError("y must be a 1-d array matching the rows of X")
    grouped: dict[LoadingMode, list[tuple[float, float]]] = {}
    for (mode, control), stress in zip(rows, stresses):
        grouped.setdefault(mode, []).append((control, float(stress)))
    series = []
    for mode in MODE_ORDER:
        if mode not in grouped:
            continue
        points = sorted(grouped[mode])
        series.append(DataSeries(
            mode=mode,
            controls=np.array([p[0] for p in points]),
            stresses=np.array([p[1] for p in points])))
    return Dataset(series=tuple(series), provenance="estimator input")


class TermSubsetRegressor(RegressorMixin, BaseEstimator):
    """Constrained fit of a fixed subset of catalog terms.

    Parameters
    ----------
    subset : iterable of int, default=(1,)
        Canonical term indices (1..12) to fit.
    restarts : int, default=8
        Seeded initialisations of the damped Gauss-Newton iteration.
    seed : int, default=0
        Base seed for the restart draws.
    max_iter : int, default=2000
        Iteration cap per restart.

    Attributes
    ----------
    model_ : ModelSpec
        The fitted sparse model.
    result_ : FitResult
        Training losses, R-squared values and convergence data.
    """

    def __init__(self, subset=(1,), restarts=8, seed=0, max_iter=2000):
        self.subset = subset
        self.restarts = restarts
        self.seed = seed
        self.max_iter = max_iter

    def _config(self) -> FitConfig:
        return FitConfig(restarts=self.restarts, seed=self.seed,
                         max_iter=self.max_iter)

    def fit(self, X, y=None):
        dataset = _as_dataset(X, y)
        self.result_ = fit_subset(dataset, tuple(self.subset), self._config())
        self.model_ = self.result_.model
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        if isinstance(X, Dataset):
            return predict_dataset(self.model_, X)
        return np.array([
            nominal_stress(self.model_, mode, control)
            for mode, control in _check_rows(X)])


class BestSubsetRegressor(RegressorMixin, BaseEstimator):
    """Exhaustive best-subset discovery ranked by an information criterion.

    Parameters
    ----------
    criterion : {"bic", "aic", "aicc", "adjr2"}, default="bic"
    restarts, seed, max_iter : fitting budget per candidate subset.
    catalog : iterable of int or None
        Restrict the search to these term indices (default: all twelve).

    Attributes
    ----------
    model_ : ModelSpec fitted on the winning subset.
    subset_ : tuple of int, the winning term indices.
    discovery_ : DiscoveryResult with the per-size table and full ranking.
    """

    def __init__(self, criterion="bic", restarts=8, seed=0, max_iter=2000,
                 catalog=None):
        self.criterion = criterion
        self.restarts = restarts
        self.seed = seed
        self.max_iter = max_iter
        self.catalog = catalog

    def fit(self, X, y=None):
        dataset = _as_dataset(X, y)
        config = FitConfig(restarts=self.restarts, seed=self.seed,
                           max_iter=self.max_iter)
        self.discovery_ = best_subset_discover(
            dataset, SelectionCriterion(self.criterion), config,
            catalog=self.catalog)
        self.model_ = self.discovery_.best.model
        self.subset_ = self.discovery_.best_subset
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        if isinstance(X, Dataset):
            return predict_dataset(self.model_, X)
        return np.array([
            nominal_stress(self.model_, mode, control)
            for mode, control in _check_rows(X)])


class ConstitutiveNetworkRegressor(RegressorMixin, BaseEstimator):
    """Regularised non-negative gradient training of all twelve terms.

    Trains the full catalog with Adam under ``MAPE + alpha1 L1 + alpha2 L2``
    and prunes terms with negligible energy contribution.

    Attributes
    ----------
    model_ : the pruned ModelSpec.
    discovery_ : DiscoveryResult carrying the unpruned fit as ``full_fit``.
    """

    def __init__(self, alpha1=0.0, alpha2=0.0, learning_rate=1e-3,
                 epochs=20000, seed=0, prune_threshold=1e-3,
                 prune_on="energy"):
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.prune_threshold = prune_threshold
        self.prune_on = prune_on

    def fit(self, X, y=None):
        dataset = _as_dataset(X, y)
        config = AdamConfig(alpha1=self.alpha1, alpha2=self.alpha2,
                            learning_rate=self.learning_rate,
                            epochs=self.epochs, seed=self.seed)
        self.discovery_ = nn_discover(dataset, config,
                                      prune_threshold=self.prune_threshold,
                                      prune_on=self.prune_on)
        self.model_ = self.discovery_.best.model
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        if isinstance(X, Dataset):
            return predict_dataset(self.model_, X)
        return np.array([
            nominal_stress(self.model_, mode, control)
            for mode, control in _check_rows(X)])


_FAMILIES = {
    "neo-hookean": (1,),
    "mooney-rivlin": (1, 2),
    "demiray": (5,),
    "gent": (9,),
}


class ClassicModelRegressor(RegressorMixin, BaseEstimator):
    """Fit one of the classic models through its catalog embedding.

    ``family`` selects neo-Hookean (term 1), Mooney-Rivlin (terms 1 and 2),
    Demiray (term 5) or Gent (term 9); the non-negativity box encodes each
    family's structural constraints.  ``params_`` reports the recovered
    material constants (``mu`` plus ``c2``, ``beta`` or ``eta``).
    """

    def __init__(self, family="neo-hookean", restarts=8, seed=0, max_iter=2000):
        self.family = family
        self.restarts = restarts
        self.seed = seed
        self.max_iter = max_iter

    def fit(self, X, y=None):
        try:
            subset = _FAMILIES[self.family]
        except KeyError:
            raise DataError(
                f"unknown family {self.family!r}; choose from "
                f"{sorted(_FAMILIES)}") from None
        dataset = _as_dataset(X, y)
        config = FitConfig(restarts=self.restarts, seed=self.seed,
                           max_iter=self.max_iter)
        self.result_ = fit_subset(dataset, subset, config)
        self.model_ = self.result_.model
        self.params_ = _classic_constants(self.family, self.model_)
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        if isinstance(X, Dataset):
            return predict_dataset(self.model_, X)
        return np.array([
            nominal_stress(self.model_, mode, control)
            for mode, control in _check_rows(X)])


def _classic_constants(family: str, model) -> dict[str, float]:
    if family == "neo-hookean":
        return {"mu": 2.0 * model.params(1).outer}
    if family == "mooney-rivlin":
        c2 = model.params(2).outer
        return {"mu": 2.0 * (model.params(1).outer + c2), "c2": c2}
    if family == "demiray":
        params = model.params(5)
        return {"mu": 2.0 * params.outer * params.inner, "beta": params.inner}
    params = model.params(9)
    eta = np.inf if params.inner == 0.0 else 1.0 / params.inner
    return {"mu": 2.0 * params.outer * params.inner, "eta": eta}
