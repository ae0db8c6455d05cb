"""Kinematics of the two homogeneous loading protocols.

Both protocols are treated as incompressible (det F = 1):

* uniaxial stretch along e1 with free lateral faces,
  F = diag(lambda, 1/sqrt(lambda), 1/sqrt(lambda));
* simple shear in the e1-e2 plane, F = I + gamma e1 (x) e2.

Each deformation is summarised by the principal invariants of the right
Cauchy-Green tensor C = F^T F:

    I1 = tr C,    I2 = tr(cof C),    I3 = det C = 1.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DomainError

__all__ = [
    "LoadingMode",
    "DeformationState",
    "invariants_uniaxial",
    "invariants_shear",
    "piola_transform",
]


class LoadingMode(Enum):
    """Loading protocol labels, with their dataset file codes as values."""

    TENSION = "ten"
    COMPRESSION = "com"
    SHEAR = "shr"

    @classmethod
    def from_code(cls, code: str) -> "LoadingMode":
        try:
            return cls(code)
        except ValueError:
            raise DomainError(f"unknown loading mode code {code!r}") from None


@dataclass(frozen=True)
class DeformationState:
    """One homogeneous deformation: its mode, control variable and invariants.

    ``control`` is the stretch ``lambda`` for uniaxial states and the amount
    of shear ``gamma`` for shear states.  ``i3`` is always 1 under the
    incompressibility constraint.
    """

    mode: LoadingMode
    control: float
    i1: float
    i2: float
    i3: float = 1.0


def invariants_uniaxial(stretch: float) -> DeformationState:
    """Invariants of an incompressible uniaxial stretch.

    I1 = lambda^2 + 2/lambda and I2 = 2*lambda + 1/lambda^2.  Stretches
    above 1 are labelled tension, stretches below 1 compression; the
    reference state lambda = 1 is labelled tension by convention.

    Raises
    ------
    DomainError
        If ``stretch`` is not a finite positive number.
    """
    lam = float(stretch)
    if not np.isfinite(lam) or lam <= 0.0:
        raise DomainError(f"uniaxial stretch must be positive, got {stretch!r}")
    i1 = lam * lam + 2.0 / lam
    i2 = 2.0 * lam + 1.0 / (lam * lam)
    mode = LoadingMode.TENSION if lam >= 1.0 else LoadingMode.COMPRESSION
    return DeformationState(mode=mode, control=lam, i1=i1, i2=i2)


def invariants_shear(gamma: float) -> DeformationState:
    """Invariants of a simple shear: I1 = I2 = 3 + gamma^2.

    Raises
    ------
    DomainError
        If ``gamma`` is negative or not finite.
    """
    g = float(gamma)
    if not np.isfinite(g) or g < 0.0:
        raise DomainError(f"amount of shear must be non-negative, got {gamma!r}")
    i = 3.0 + g * g
    return DeformationState(mode=LoadingMode.SHEAR, control=g, i1=i, i2=i)


def piola_transform(cauchy: np.ndarray, deformation_gradient: np.ndarray) -> np.ndarray:
    """First Piola-Kirchhoff stress from a Cauchy stress, P = J sigma F^{-T}.

    Parameters
    ----------
    cauchy : (3, 3) array_like
        Cauchy (true) stress tensor.
    deformation_gradient : (3, 3) array_like
        Deformation gradient F, which must have positive determinant.
    """
    sigma = np.asarray(cauchy, dtype=float)
    F = np.asarray(deformation_gradient, dtype=float)
    if sigma.shape != (3, 3) or F.shape != (3, 3):
        raise DomainError(
            f"expected 3x3 tensors, got shapes {sigma.shape} and {F.shape}"
        )
    if not (np.isfinite(sigma).all() and np.isfinite(F).all()):
        raise DomainError("stress and deformation gradient must be finite")
    jacobian = float(np.linalg.det(F))
    if jacobian <= 0.0:
        raise DomainError(
            f"deformation gradient must have positive determinant, got {jacobian!r}"
        )
    return jacobian * sigma @ np.linalg.inv(F).T
