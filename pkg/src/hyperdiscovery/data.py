"""Datasets of stress-control measurements and the synthetic-data oracle.

A dataset holds one series per loading mode: tension (`ten`, stretches
lambda >= 1), compression (`com`, 0 < lambda <= 1) and simple shear
(`shr`, gamma >= 0).  Controls are dimensionless, stresses are nominal
stresses in kPa, signed (compression stresses are negative).

The CSV schema is ``mode,control,stress_kpa`` with a mandatory header,
UTF-8 text, ``.`` decimal separator and ``#`` comment lines.  Negative
shear controls are folded to positive ones with negated stress, using the
odd symmetry of the shear response.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .energy import FEASIBILITY_MARGIN, ModelSpec, feasibility_bound
from .exceptions import DataError, FeasibilityError
from .kinematics import LoadingMode, invariants_shear, invariants_uniaxial
from .stress import predict_curve

__all__ = [
    "DataWarning",
    "DataSeries",
    "Dataset",
    "SyntheticSpec",
    "MODE_ORDER",
    "load_csv",
    "save_csv",
    "generate_synthetic",
    "invariant_extrema",
    "predict_dataset",
]

CSV_HEADER = "mode,control,stress_kpa"

# Canonical mode ordering used everywhere data is grouped or written.
MODE_ORDER: tuple[LoadingMode, ...] = (
    LoadingMode.TENSION, LoadingMode.COMPRESSION, LoadingMode.SHEAR)


class DataWarning(UserWarning):
    """Non-fatal dataset oddity, e.g. a tension stress with the wrong sign."""


def _admissibility_error(mode: LoadingMode, control: float) -> str | None:
    if mode is LoadingMode.TENSION and control < 1.0:
        return "tension control must satisfy lambda >= 1"
    if mode is LoadingMode.COMPRESSION and not (0.0 < control <= 1.0):
        return "compression control must satisfy 0 < lambda <= 1"
    if mode is LoadingMode.SHEAR and control < 0.0:
        return "shear control must satisfy gamma >= 0"
    return None


@dataclass(frozen=True)
class DataSeries:
    """All measurements of one loading mode, sorted by control."""

    mode: LoadingMode
    controls: np.ndarray
    stresses: np.ndarray

    def __post_init__(self):
        controls = np.asarray(self.controls, dtype=float)
        stresses = np.asarray(self.stresses, dtype=float)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "stresses", stresses)
        if controls.ndim != 1 or controls.shape != stresses.shape:
            raise DataError(
                f"{self.mode.value}: controls and stresses must be equal-length "
                "one-dimensional arrays")
        if not (np.isfinite(controls).all() and np.isfinite(stresses).all()):
            raise DataError(f"{self.mode.value}: values must be finite")
        if len(controls) < 2:
            raise DataError(f"{self.mode.value}: a series needs at least 2 points")
        if np.any(np.diff(controls) <= 0.0):
            raise DataError(
                f"{self.mode.value}: controls must be strictly increasing")
        for control in (controls[0], controls[-1]):
            message = _admissibility_error(self.mode, float(control))
            if message is not None:
                raise DataError(f"{self.mode.value}: {message}")
        self._sign_sanity()

    def _sign_sanity(self):
        if self.mode is LoadingMode.TENSION and np.any(self.stresses < 0.0):
            warnings.warn("tension series contains negative stresses", DataWarning,
                          stacklevel=3)
        if self.mode is LoadingMode.COMPRESSION and np.any(self.stresses > 0.0):
            warnings.warn("compression series contains positive stresses",
                          DataWarning, stacklevel=3)

    def __len__(self) -> int:
        return len(self.controls)


@dataclass(frozen=True)
class Dataset:
    """An immutable collection of per-mode series plus a provenance tag."""

    series: tuple[DataSeries, ...]
    provenance: str = ""

    def __post_init__(self):
        ordered = tuple(sorted(
            self.series, key=lambda s: MODE_ORDER.index(s.mode)))
        object.__setattr__(self, "series", ordered)
        if not ordered:
            raise DataError("dataset must contain at least one mode")
        seen = [s.mode for s in ordered]
        if len(set(seen)) != len(seen):
            raise DataError("dataset contains two series for the same mode")

    @property
    def modes(self) -> tuple[LoadingMode, ...]:
        return tuple(s.mode for s in self.series)

    @property
    def n_points(self) -> int:
        return sum(len(s) for s in self.series)

    def has_mode(self, mode: LoadingMode) -> bool:
        return any(s.mode is mode for s in self.series)

    def series_for(self, mode: LoadingMode) -> DataSeries:
        for s in self.series:
            if s.mode is mode:
                return s
        raise DataError(f"mode '{mode.value}' absent from dataset")

    def only(self, modes) -> "Dataset":
        """Restrict to the given modes, which must all be present."""
        wanted = tuple(modes)
        for mode in wanted:
            if not self.has_mode(mode):
                raise DataError(f"training mode '{mode.value}' absent from dataset")
        kept = tuple(s for s in self.series if s.mode in wanted)
        return Dataset(series=kept, provenance=self.provenance)

    def all_stresses(self) -> np.ndarray:
        return np.concatenate([s.stresses for s in self.series])


def _extrema_over(mode_controls) -> tuple[float, float]:
    """Maxima of (I1 - 3, I2 - 3) over (mode, controls) pairs."""
    x1_max = 0.0
    x2_max = 0.0
    for mode, controls in mode_controls:
        for control in np.asarray(controls, dtype=float):
            if mode is LoadingMode.SHEAR:
                state = invariants_shear(float(control))
            else:
                state = invariants_uniaxial(float(control))
            x1_max = max(x1_max, state.i1 - 3.0)
            x2_max = max(x2_max, state.i2 - 3.0)
    return (x1_max, x2_max)


def invariant_extrema(dataset: Dataset) -> tuple[float, float]:
    """Largest shifted invariants (max I1-3, max I2-3) the data reaches.

    Used to size the feasibility box of logarithmic inner coefficients.
    """
    return _extrema_over((s.mode, s.controls) for s in dataset.series)


def predict_dataset(model: ModelSpec, dataset: Dataset) -> np.ndarray:
    """Model stresses at every data point, concatenated in dataset order."""
    return np.concatenate([
        predict_curve(model, s.mode, s.controls) for s in dataset.series])


# ---------------------------------------------------------------------------
# CSV ingestion and emission.

def _parse_row(lineno: int, line: str) -> tuple[LoadingMode, float, float]:
    fields = line.split(",")
    if len(fields) != 3:
        raise DataError(f"line {lineno}: expected 3 fields, got {len(fields)}")
    code = fields[0].strip()
    if code not in {m.value for m in MODE_ORDER}:
        raise DataError(f"line {lineno}: unknown mode {code!r}")
    mode = LoadingMode(code)
    try:
        control = float(fields[1])
        stress = float(fields[2])
    except ValueError:
        raise DataError(f"line {lineno}: malformed number") from None
    if not (np.isfinite(control) and np.isfinite(stress)):
        raise DataError(f"line {lineno}: values must be finite")
    if mode is LoadingMode.SHEAR and control < 0.0:
        # Odd symmetry of the shear response: P12(-gamma) = -P12(gamma).
        control, stress = -control, -stress
    message = _admissibility_error(mode, control)
    if message is not None:
        raise DataError(f"line {lineno}: {message}")
    return mode, control, stress


def load_csv(path) -> Dataset:
    """Load a ``mode,control,stress_kpa`` CSV file into a Dataset.

    Raises
    ------
    DataError
        On a missing or wrong header, malformed rows, inadmissible controls,
        duplicate (mode, control) pairs or an empty file; messages carry the
        offending line number.
    """
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    if text.startswith("﻿"):
        text = text[len("﻿"):]
    rows: dict[LoadingMode, dict[float, float]] = {}
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise DataError(
                    f"line {lineno}: expected header '{CSV_HEADER}', got {line!r}")
            header_seen = True
            continue
        mode, control, stress = _parse_row(lineno, line)
        per_mode = rows.setdefault(mode, {})
        if control in per_mode:
            raise DataError(
                f"line {lineno}: duplicate ({mode.value}, {control!r}) point")
        per_mode[control] = stress
    if not header_seen:
        raise DataError("empty dataset file (missing header)")
    if not rows:
        raise DataError("dataset file contains no data rows")
    series = []
    for mode in MODE_ORDER:
        if mode not in rows:
            continue
        controls = np.array(sorted(rows[mode]), dtype=float)
        stresses = np.array([rows[mode][c] for c in controls], dtype=float)
        series.append(DataSeries(mode=mode, controls=controls, stresses=stresses))
    return Dataset(series=tuple(series), provenance=str(path))


def save_csv(path, dataset: Dataset) -> None:
    """Write a Dataset back to CSV; a load round-trip is bit-exact."""
    lines = [CSV_HEADER]
    for s in dataset.series:
        for control, stress in zip(s.controls, s.stresses):
            lines.append(f"{s.mode.value},{float(control)!r},{float(stress)!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Synthetic oracle.

@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic dataset: truth model, grids, noise and seed.

    ``noise`` is the relative standard deviation of multiplicative Gaussian
    noise: stresses are ``truth * (1 + noise * eps)`` with unit-normal eps.
    """

    truth: ModelSpec
    grids: dict[LoadingMode, np.ndarray] = field(default_factory=dict)
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.noise) or self.noise < 0.0:
            raise DataError(f"noise must be finite and >= 0, got {self.noise!r}")
        if not self.grids:
            raise DataError("at least one control grid is required")
        grids = {}
        for mode, grid in self.grids.items():
            values = np.asarray(grid, dtype=float)
            grids[mode] = values
            if len(values) < 2:
                raise DataError(f"{mode.value}: a grid needs at least 2 points")
            if np.any(np.diff(values) <= 0.0):
                raise DataError(f"{mode.value}: grid must be strictly increasing")
            for control in values:
                message = _admissibility_error(mode, float(control))
                if message is not None:
                    raise DataError(f"{mode.value}: {message}")
        object.__setattr__(self, "grids", grids)


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Evaluate a truth model over the grids and apply seeded relative noise.

    Raises
    ------
    FeasibilityError
        If the truth model's log terms are infeasible over the grids.
    """
    x1_max, x2_max = _extrema_over(spec.grids.items())
    report = feasibility_bound(spec.truth, x1_max, x2_max)
    if not report:
        detail = ", ".join(
            f"term {v.term_index} (inner {v.inner:g}, limit {v.limit:g})"
            for v in report.violations)
        raise FeasibilityError(
            f"truth model infeasible over the requested grids: {detail}",
            term_index=report.violations[0].term_index)
    rng = np.random.default_rng(spec.seed)
    series = []
    for mode in MODE_ORDER:
        if mode not in spec.grids:
            continue
        grid = spec.grids[mode]
        exact = predict_curve(spec.truth, mode, grid)
        eps = rng.standard_normal(len(grid))
        stresses = exact * (1.0 + spec.noise * eps)
        series.append(DataSeries(mode=mode, controls=grid, stresses=stresses))
    with warnings.catch_warnings():
        # Noise may flip signs of near-zero stresses; that is expected here.
        warnings.simplefilter("ignore", DataWarning)
        return Dataset(
            series=tuple(series),
            provenance=f"synthetic(seed={spec.seed}, noise={spec.noise:g})")
