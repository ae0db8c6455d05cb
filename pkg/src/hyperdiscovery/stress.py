"""Nominal stress responses of a catalog model under the two protocols.

For an incompressible isotropic material tested in uniaxial stretch with
free lateral faces, the axial first Piola-Kirchhoff stress is

    P11 = 2 (dPsi/dI1 + (1/lambda) dPsi/dI2) (lambda - 1/lambda^2),

and in simple shear the shear component is

    P12 = 2 (dPsi/dI1 + dPsi/dI2) gamma.

Both follow from P = J sigma F^{-T} after eliminating the pressure with the
traction-free boundary conditions.
"""

import numpy as np

from .energy import ModelSpec, model_derivative
from .exceptions import DomainError, FeasibilityError
from .kinematics import LoadingMode

__all__ = [
    "nominal_stress_uniaxial",
    "nominal_stress_shear",
    "nominal_stress",
    "predict_curve",
]


def _uniaxial_invariants(stretch):
    lam = np.asarray(stretch, dtype=float)
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0.0):
        raise DomainError("uniaxial stretch must be positive and finite")
    return lam, lam * lam + 2.0 / lam, 2.0 * lam + 1.0 / (lam * lam)


def nominal_stress_uniaxial(model: ModelSpec, stretch):
    """Axial nominal stress P11 in kPa at one or many stretches."""
    lam, i1, i2 = _uniaxial_invariants(stretch)
    d1, d2 = model_derivative(model, i1, i2)
    geometry = lam - 1.0 / (lam * lam)
    value = 2.0 * (d1 + d2 / lam) * geometry
    return float(value) if np.ndim(stretch) == 0 else value


def nominal_stress_shear(model: ModelSpec, gamma):
    """Shear nominal stress P12 in kPa at one or many amounts of shear."""
    g = np.asarray(gamma, dtype=float)
    if not np.all(np.isfinite(g)) or np.any(g < 0.0):
        raise DomainError("amount of shear must be non-negative and finite")
    i = 3.0 + g * g
    d1, d2 = model_derivative(model, i, i)
    value = 2.0 * (d1 + d2) * g
    return float(value) if np.ndim(gamma) == 0 else value


def nominal_stress(model: ModelSpec, mode: LoadingMode, control):
    """Nominal stress for a control value in the given loading mode."""
    if mode is LoadingMode.SHEAR:
        return nominal_stress_shear(model, control)
    return nominal_stress_uniaxial(model, control)


def predict_curve(model: ModelSpec, mode: LoadingMode, controls) -> np.ndarray:
    """Predicted stresses over an array of control values.

    Raises
    ------
    FeasibilityError
        If any point is infeasible for the model's log terms; the error
        reports the first offending point index.
    """
    values = np.asarray(controls, dtype=float)
    if values.ndim != 1:
        raise DomainError("controls must be a one-dimensional array")
    try:
        return np.asarray(nominal_stress(model, mode, values), dtype=float)
    except FeasibilityError as exc:
        for position, control in enumerate(values):
            try:
                nominal_stress(model, mode, float(control))
            except FeasibilityError as point_exc:
                raise FeasibilityError(
                    f"{point_exc} at point {position} (control {control!r})",
                    term_index=point_exc.term_index,
                    point_index=position) from None
        raise exc
