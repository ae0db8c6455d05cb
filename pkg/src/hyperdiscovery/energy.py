"""The strain-energy term catalog and classic models expressible in it.

Every candidate model is a non-negative combination of twelve polyconvex
terms built from the shifted invariants x1 = I1 - 3 and x2 = I2 - 3:

    index  term                      index  term
    -----  ----                      -----  ----
      1    b*x1                        7    b*(exp(a*x1^2) - 1)
      2    b*x2                        8    b*(exp(a*x2^2) - 1)
      3    b*x1^2                      9    -b*ln(1 - a*x1)
      4    b*x2^2                     10    -b*ln(1 - a*x2)
      5    b*(exp(a*x1) - 1)          11    -b*ln(1 - a*x1^2)
      6    b*(exp(a*x2) - 1)          12    -b*ln(1 - a*x2^2)

Outer weights b carry units of kPa; inner coefficients a are dimensionless.
All coefficients are constrained non-negative, which keeps every term zero
in the reference state and its energy non-negative on admissible states.
In twenty-slot parameter tables the outer weight of term k occupies slot k
and the inner coefficient of a nonlinear term k occupies slot k + 8.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DataError, DomainError, FeasibilityError, ParameterError

__all__ = [
    "Activation",
    "TermKind",
    "TermParams",
    "ModelSpec",
    "CATALOG",
    "FEASIBILITY_MARGIN",
    "term_kind",
    "term_value",
    "term_derivative",
    "model_energy",
    "model_derivative",
    "feasibility_bound",
    "FeasibilityReport",
    "FeasibilityViolation",
    "log_inner_limit",
    "NeoHookean",
    "MooneyRivlin",
    "Demiray",
    "Gent",
    "ClassicModel",
    "classic_to_spec",
    "model_to_text",
    "text_to_model",
    "save_model",
    "load_model",
    "term_expression",
    "model_expression",
    "parameter_vector",
    "PARAMETER_LABELS",
]

# Slack kept between a fitted log coefficient and its singularity.
FEASIBILITY_MARGIN = 1e-6

# Shifted invariants this far below zero are treated as rounding noise and
# clamped; anything lower is a genuine domain violation.
_INVARIANT_SLACK = 1e-9


class Activation(Enum):
    LINEAR = "linear"
    EXPONENTIAL = "exp"
    LOGARITHMIC = "log"


@dataclass(frozen=True)
class TermKind:
    """One catalog entry: which invariant it reads, its power and activation."""

    index: int
    invariant: int
    power: int
    activation: Activation

    @property
    def is_linear(self) -> bool:
        return self.activation is Activation.LINEAR

    @property
    def inner_slot(self) -> int | None:
        """Slot of the inner coefficient in a 20-entry parameter table."""
        return None if self.is_linear else self.index + 8


CATALOG: tuple[TermKind, ...] = tuple(
    TermKind(index=1 + offset + 4 * group, invariant=1 + offset % 2,
             power=1 + offset // 2, activation=activation)
    for group, activation in enumerate(
        (Activation.LINEAR, Activation.EXPONENTIAL, Activation.LOGARITHMIC))
    for offset in range(4)
)

_BY_INDEX = {kind.index: kind for kind in CATALOG}


def term_kind(index: int) -> TermKind:
    """Catalog entry for a canonical term index in 1..12."""
    try:
        return _BY_INDEX[index]
    except KeyError:
        raise DomainError(f"term index must be in 1..12, got {index!r}") from None


@dataclass(frozen=True)
class TermParams:
    """Coefficients of one term: outer weight (kPa) and inner coefficient.

    ``inner`` must be ``None`` for linear terms and a non-negative float for
    exponential and logarithmic terms.
    """

    outer: float
    inner: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.outer) or self.outer < 0.0:
            raise ParameterError(
                f"outer weight must be finite and non-negative, got {self.outer!r}")
        if self.inner is not None and (
                not np.isfinite(self.inner) or self.inner < 0.0):
            raise ParameterError(
                f"inner coefficient must be finite and non-negative, got {self.inner!r}")


class ModelSpec:
    """A sparse model: a map from canonical term index to coefficients.

    Instances are immutable and keep their terms sorted by index, so two
    models built from the same coefficients in any order compare equal.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[int, TermParams]):
        resolved = []
        for index in sorted(terms):
            kind = term_kind(index)
            params = terms[index]
            if kind.is_linear and params.inner is not None:
                raise ParameterError(
                    f"term {index} is linear and takes no inner coefficient")
            if not kind.is_linear and params.inner is None:
                raise ParameterError(
                    f"term {index} requires an inner coefficient")
            resolved.append((kind, params))
        object.__setattr__(self, "_terms", tuple(resolved))

    @classmethod
    def build(cls, coefficients: dict[int, float | tuple[float, float]]) -> "ModelSpec":
        """Build from ``{index: outer}`` or ``{index: (outer, inner)}`` entries."""
        terms = {}
        for index, value in coefficients.items():
            if isinstance(value, (tuple, list)):
                outer, inner = value
                terms[int(index)] = TermParams(float(outer), float(inner))
            else:
                terms[int(index)] = TermParams(float(value))
        return cls(terms)

    @property
    def terms(self) -> tuple[tuple[TermKind, TermParams], ...]:
        return self._terms

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(kind.index for kind, _ in self._terms)

    def params(self, index: int) -> TermParams:
        for kind, params in self._terms:
            if kind.index == index:
                return params
        raise KeyError(index)

    def __contains__(self, index: int) -> bool:
        return any(kind.index == index for kind, _ in self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __repr__(self) -> str:
        inside = ", ".join(
            f"{kind.index}: ({params.outer!r}, {params.inner!r})"
            if params.inner is not None else f"{kind.index}: {params.outer!r}"
            for kind, params in self._terms)
        return f"ModelSpec({{{inside}}})"

    @property
    def n_parameters(self) -> int:
        """Number of free coefficients: one per term plus one per nonlinear term."""
        return sum(1 if kind.is_linear else 2 for kind, _ in self._terms)

    def energy(self, i1, i2):
        return model_energy(self, i1, i2)

    def derivative(self, i1, i2):
        return model_derivative(self, i1, i2)


def _shifted(invariant_value, label: str):
    """Shift an invariant by 3, clamping tiny negative rounding noise."""
    x = np.asarray(invariant_value, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{label} must be finite")
    shifted = x - 3.0
    if np.any(shifted < -_INVARIANT_SLACK):
        raise DomainError(
            f"{label} must be at least 3 for admissible incompressible states")
    return np.maximum(shifted, 0.0)


def _term_input(kind: TermKind, i1, i2):
    return _shifted(i1, "I1") if kind.invariant == 1 else _shifted(i2, "I2")


def _log_argument(kind: TermKind, inner: float, u, point_index=None):
    arg = 1.0 - inner * u
    if np.any(arg <= 0.0):
        raise FeasibilityError(
            f"log term {kind.index} evaluated at or beyond its singularity "
            f"(inner coefficient {inner!r})",
            term_index=kind.index, point_index=point_index)
    return arg


def _as_scalar(value, like):
    return float(value) if np.isscalar(like) or np.ndim(like) == 0 else value


def term_value(kind: TermKind, params: TermParams, i1, i2):
    """Energy contribution of one term at invariants (i1, i2), in kPa.

    Accepts scalars or equally shaped arrays for the invariants.

    Raises
    ------
    FeasibilityError
        For a logarithmic term evaluated where ``1 - a * x^p <= 0``.
    DomainError
        If an invariant lies below its reference value of 3.
    """
    x = _term_input(kind, i1, i2)
    u = x if kind.power == 1 else x * x
    if kind.activation is Activation.LINEAR:
        value = params.outer * u
    elif kind.activation is Activation.EXPONENTIAL:
        value = params.outer * np.expm1(params.inner * u)
    else:
        value = -params.outer * np.log(_log_argument(kind, params.inner, u))
    return _as_scalar(value, i1)


def term_derivative(kind: TermKind, params: TermParams, i1, i2):
    """Partial derivatives (d/dI1, d/dI2) of one term's energy.

    Exactly one component is nonzero: the one matching the invariant the
    term reads.  With x the shifted invariant and u = x^p:

    * linear        b * p * x^(p-1)
    * exponential   b * a * p * x^(p-1) * exp(a u)
    * logarithmic   b * a * p * x^(p-1) / (1 - a u)
    """
    x = _term_input(kind, i1, i2)
    u = x if kind.power == 1 else x * x
    chain = 1.0 if kind.power == 1 else 2.0 * x
    if kind.activation is Activation.LINEAR:
        deriv = params.outer * chain
    elif kind.activation is Activation.EXPONENTIAL:
        deriv = params.outer * params.inner * chain * np.exp(params.inner * u)
    else:
        deriv = params.outer * params.inner * chain / _log_argument(
            kind, params.inner, u)
    deriv = deriv * np.ones_like(x)
    zero = np.zeros_like(x)
    pair = (deriv, zero) if kind.invariant == 1 else (zero, deriv)
    return (_as_scalar(pair[0], i1), _as_scalar(pair[1], i1))


def model_energy(model: ModelSpec, i1, i2):
    """Total strain energy of a model at invariants (i1, i2), in kPa."""
    total = np.zeros_like(np.asarray(i1, dtype=float))
    for kind, params in model.terms:
        total = total + term_value(kind, params, i1, i2)
    return _as_scalar(total, i1)


def model_derivative(model: ModelSpec, i1, i2):
    """Summed partial derivatives (dPsi/dI1, dPsi/dI2) of a model."""
    d1 = np.zeros_like(np.asarray(i1, dtype=float))
    d2 = np.zeros_like(d1)
    for kind, params in model.terms:
        t1, t2 = term_derivative(kind, params, i1, i2)
        d1 = d1 + t1
        d2 = d2 + t2
    return (_as_scalar(d1, i1), _as_scalar(d2, i1))


@dataclass(frozen=True)
class FeasibilityViolation:
    """One log term whose coefficient crosses the dataset's singular bound."""

    term_index: int
    inner: float
    limit: float


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    violations: tuple[FeasibilityViolation, ...]

    def __bool__(self) -> bool:
        return self.ok


def log_inner_limit(kind: TermKind, x1_max: float, x2_max: float) -> float:
    """Largest admissible inner coefficient of a log term on a data range.

    The bound keeps ``a * x^p`` below ``1 - FEASIBILITY_MARGIN`` at the
    largest shifted invariant the data reaches; it is +inf when the data
    never leaves the reference state.
    """
    if kind.activation is not Activation.LOGARITHMIC:
        return np.inf
    x_max = x1_max if kind.invariant == 1 else x2_max
    u_max = x_max if kind.power == 1 else x_max * x_max
    if u_max <= 0.0:
        return np.inf
    return (1.0 - FEASIBILITY_MARGIN) / u_max


def feasibility_bound(model: ModelSpec, x1_max: float, x2_max: float) -> FeasibilityReport:
    """Check every log term of a model against a dataset's invariant range.

    ``x1_max`` and ``x2_max`` are the largest shifted invariants (I - 3)
    reached by the data.  A log term is feasible when its coefficient keeps
    ``a * x^p < 1 - FEASIBILITY_MARGIN`` over that range.
    """
    if x1_max < 0.0 or x2_max < 0.0:
        raise DomainError("shifted invariant maxima must be non-negative")
    violations = []
    for kind, params in model.terms:
        if kind.activation is not Activation.LOGARITHMIC:
            continue
        x_max = x1_max if kind.invariant == 1 else x2_max
        u_max = x_max if kind.power == 1 else x_max * x_max
        if params.inner * u_max >= 1.0 - FEASIBILITY_MARGIN:
            violations.append(FeasibilityViolation(
                term_index=kind.index, inner=params.inner,
                limit=log_inner_limit(kind, x1_max, x2_max)))
    return FeasibilityReport(ok=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# Classic models and their catalog embeddings.

@dataclass(frozen=True)
class NeoHookean:
    """Psi = (mu/2) (I1 - 3), shear modulus mu in kPa."""

    mu: float

    def __post_init__(self):
        _require_positive("mu", self.mu)


@dataclass(frozen=True)
class MooneyRivlin:
    """Psi = (mu/2 - c2)(I1 - 3) + c2 (I2 - 3)."""

    mu: float
    c2: float

    def __post_init__(self):
        _require_positive("mu", self.mu)
        if not np.isfinite(self.c2) or self.c2 < 0.0:
            raise ParameterError(f"c2 must be finite and non-negative, got {self.c2!r}")
        if 0.5 * self.mu - self.c2 < 0.0:
            raise ParameterError(
                "mu/2 - c2 must be non-negative so the first weight stays admissible")


@dataclass(frozen=True)
class Demiray:
    """Psi = (mu / (2 beta)) (exp(beta (I1 - 3)) - 1)."""

    mu: float
    beta: float

    def __post_init__(self):
        _require_positive("mu", self.mu)
        _require_positive("beta", self.beta)


@dataclass(frozen=True)
class Gent:
    """Psi = -(mu eta / 2) ln(1 - (I1 - 3) / eta)."""

    mu: float
    eta: float

    def __post_init__(self):
        _require_positive("mu", self.mu)
        _require_positive("eta", self.eta)


ClassicModel = NeoHookean | MooneyRivlin | Demiray | Gent


def _require_positive(name: str, value: float):
    if not np.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be finite and positive, got {value!r}")


def classic_to_spec(model: ClassicModel) -> ModelSpec:
    """Embed a classic model into the catalog.

    neo-Hooke uses term 1, Mooney-Rivlin terms 1 and 2, Demiray term 5 and
    Gent term 9 (with outer weight mu*eta/2 and inner coefficient 1/eta).
    """
    if isinstance(model, NeoHookean):
        return ModelSpec.build({1: 0.5 * model.mu})
    if isinstance(model, MooneyRivlin):
        return ModelSpec.build({1: 0.5 * model.mu - model.c2, 2: model.c2})
    if isinstance(model, Demiray):
        return ModelSpec.build({5: (0.5 * model.mu / model.beta, model.beta)})
    if isinstance(model, Gent):
        return ModelSpec.build({9: (0.5 * model.mu * model.eta, 1.0 / model.eta)})
    raise ParameterError(f"unknown classic model {model!r}")


# ---------------------------------------------------------------------------
# Plain-text serialization: one "index,outer,inner" line per term, numbers
# written with 17 significant digits so a round trip is bit-exact.

def model_to_text(model: ModelSpec) -> str:
    lines = []
    for kind, params in model.terms:
        inner = "" if params.inner is None else f"{params.inner:.17g}"
        lines.append(f"{kind.index},{params.outer:.17g},{inner}")
    return "\n".join(lines) + ("\n" if lines else "")

def text_to_model(text: str) -> ModelSpec:
    """Parse the serialization produced by :func:`model_to_text`.

    Raises
    ------
    DataError
        On malformed lines, unknown indices or duplicate terms.
    """
    terms: dict[int, TermParams] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise DataError(f"model line {lineno}: expected 3 fields, got {len(fields)}")
        try:
            index = int(fields[0])
            outer = float(fields[1])
            inner = float(fields[2]) if fields[2].strip() else None
        except ValueError as exc:
            raise DataError(f"model line {lineno}: {exc}") from None
        if index in terms:
            raise DataError(f"model line {lineno}: duplicate term index {index}")
        try:
            kind = term_kind(index)
            terms[index] = TermParams(outer, inner)
        except (DomainError, ParameterError) as exc:
            raise DataError(f"model line {lineno}: {exc}") from None
    try:
        return ModelSpec(terms)
    except ParameterError as exc:
        raise DataError(str(exc)) from None


def save_model(path, model: ModelSpec) -> None:
    with open(path, "w", newline="\n") as handle:
        handle.write(model_to_text(model))


def load_model(path) -> ModelSpec:
    with open(path) as handle:
        return text_to_model(handle.read())


# ---------------------------------------------------------------------------
# Human-readable term formulas for reports and plot legends.

PARAMETER_LABELS: tuple[str, ...] = tuple(f"b_{slot}" for slot in range(1, 21))


def term_expression(kind: TermKind, params: TermParams | None = None) -> str:
    """Render a term as a short formula, e.g. ``0.5*[I1-3]``."""
    base = f"[I{kind.invariant}-3]" + ("" if kind.power == 1 else "^2")
    if params is None:
        outer, inner = "b", "a"
    else:
        outer = f"{params.outer:.6g}"
        inner = "a" if params.inner is None else f"{params.inner:.6g}"
    if kind.activation is Activation.LINEAR:
        return f"{outer}*{base}"
    if kind.activation is Activation.EXPONENTIAL:
        return f"{outer}*(exp({inner}*{base})-1)"
    return f"-{outer}*ln(1-{inner}*{base})"


def model_expression(model: ModelSpec) -> str:
    if not model.terms:
        return "0"
    return " + ".join(term_expression(kind, params) for kind, params in model.terms)


def parameter_vector(model: ModelSpec) -> np.ndarray:
    """Twenty-slot coefficient table: outers in 1..12, inners in 13..20."""
    table = np.zeros(20)
    for kind, params in model.terms:
        table[kind.index - 1] = params.outer
        if params.inner is not None:
            table[kind.inner_slot - 1] = params.inner
    return table

