"""Nominal stress formulas for uniaxial and shear loading."""

import numpy as np
import numpy.testing as npt
import pytest

from conftest import make_states, random_model
from hyperdiscovery.energy import (
    Demiray,
    ModelSpec,
    MooneyRivlin,
    NeoHookean,
    classic_to_spec,
    model_energy,
)
from hyperdiscovery.exceptions import DomainError, FeasibilityError
from hyperdiscovery.kinematics import LoadingMode, invariants_shear, invariants_uniaxial
from hyperdiscovery.stress import (
    nominal_stress,
    nominal_stress_shear,
    nominal_stress_uniaxial,
    predict_curve,
)


def _energy_along_uniaxial(model, lam):
    state = invariants_uniaxial(lam)
    return model_energy(model, state.i1, state.i2)


def _energy_along_shear(model, gamma):
    state = invariants_shear(gamma)
    return model_energy(model, state.i1, state.i2)


class TestNeoHookeanOracle:
    def setup_method(self):
        self.model = classic_to_spec(NeoHookean(1.0))

    def test_tension(self):
        # P11 = mu (lam - 1/lam^2) at mu = 1.
        npt.assert_allclose(nominal_stress_uniaxial(self.model, 1.2),
                            1.2 - 1.2 ** -2, rtol=1e-14)
        npt.assert_allclose(nominal_stress_uniaxial(self.model, 1.1),
                            0.27355371900826464, rtol=1e-13)

    def test_compression(self):
        npt.assert_allclose(nominal_stress_uniaxial(self.model, 0.9),
                            -0.33456790123456776, rtol=1e-13)

    def test_shear(self):
        # P12 = mu * gamma at mu = 1.
        for gamma in (0.0, 0.1, 0.35):
            npt.assert_allclose(nominal_stress_shear(self.model, gamma),
                                gamma, rtol=1e-14, atol=1e-16)


class TestMooneyRivlinOracle:
    def test_compression_point(self):
        model = classic_to_spec(MooneyRivlin(1.0, 0.25))
        npt.assert_allclose(nominal_stress_uniaxial(model, 0.8),
                            -0.8578125, rtol=1e-13)

    def test_shear_slope_is_mu(self):
        mu, c2 = 1.4, 0.3
        model = classic_to_spec(MooneyRivlin(mu, c2))
        gamma = 0.2
        npt.assert_allclose(nominal_stress_shear(model, gamma), mu * gamma,
                            rtol=1e-13)


class TestDemirayOracle:
    def test_frozen_points(self):
        model = classic_to_spec(Demiray(1.0, 5.0))
        npt.assert_allclose(nominal_stress_uniaxial(model, 1.05),
                            0.14825710903634445, rtol=1e-12)
        npt.assert_allclose(nominal_stress_uniaxial(model, 1.1),
                            0.3149478616887421, rtol=1e-12)


class TestReportedShearPoint:
    def test_two_term_cortex_fit(self):
        # Published two-weight fit (exp of [I2-3], outer 0.02443, inner
        # 22.1110) predicts P12 = 0.52325 kPa at gamma = 0.2.
        model = ModelSpec.build({6: (0.02443, 22.1110)})
        p12 = nominal_stress_shear(model, 0.2)
        npt.assert_allclose(p12, 0.5232379728808546, rtol=1e-12)
        assert abs(p12 - 0.52325) < 1e-4


class TestDispatch:
    def test_routes_by_mode(self):
        model = classic_to_spec(NeoHookean(1.0))
        assert nominal_stress(model, LoadingMode.SHEAR, 0.3) == \
            nominal_stress_shear(model, 0.3)
        assert nominal_stress(model, LoadingMode.TENSION, 1.2) == \
            nominal_stress_uniaxial(model, 1.2)
        assert nominal_stress(model, LoadingMode.COMPRESSION, 0.9) == \
            nominal_stress_uniaxial(model, 0.9)

    def test_formula_domains(self):
        # The uniaxial formula itself is valid for any positive stretch;
        # the tension/compression split is a data-labelling concern.  Only
        # formula-level domain violations raise here.
        model = classic_to_spec(NeoHookean(1.0))
        with pytest.raises(DomainError):
            nominal_stress(model, LoadingMode.TENSION, 0.0)
        with pytest.raises(DomainError):
            nominal_stress(model, LoadingMode.COMPRESSION, -0.5)
        with pytest.raises(DomainError):
            nominal_stress(model, LoadingMode.SHEAR, -0.1)


class TestReferenceState:
    def test_zero_stress_for_random_models(self):
        rng = np.random.default_rng(11)
        states = make_states()
        for _ in range(200):
            model = random_model(rng, states)
            assert abs(nominal_stress_uniaxial(model, 1.0)) <= 1e-12
            assert abs(nominal_stress_shear(model, 0.0)) <= 1e-12


class TestPathDerivativeIdentity:
    def test_uniaxial(self):
        rng = np.random.default_rng(23)
        states = make_states()
        h = 1e-6
        for _ in range(30):
            model = random_model(rng, states)
            for lam in (0.8, 0.92, 1.07, 1.25):
                p = nominal_stress_uniaxial(model, lam)
                fd = (_energy_along_uniaxial(model, lam + h)
                      - _energy_along_uniaxial(model, lam - h)) / (2 * h)
                npt.assert_allclose(p, fd, rtol=1e-5, atol=1e-10)

    def test_shear(self):
        rng = np.random.default_rng(29)
        states = make_states()
        h = 1e-6
        for _ in range(30):
            model = random_model(rng, states)
            for gamma in (0.05, 0.2, 0.45):
                p = nominal_stress_shear(model, gamma)
                fd = (_energy_along_shear(model, gamma + h)
                      - _energy_along_shear(model, gamma - h)) / (2 * h)
                npt.assert_allclose(p, fd, rtol=1e-5, atol=1e-10)


class TestPredictCurve:
    def test_matches_pointwise(self):
        model = classic_to_spec(NeoHookean(1.0))
        controls = np.linspace(1.0, 1.3, 7)
        curve = predict_curve(model, LoadingMode.TENSION, controls)
        expected = [nominal_stress_uniaxial(model, float(c)) for c in controls]
        npt.assert_allclose(curve, expected, rtol=1e-14)

    def test_requires_one_dimension(self):
        model = classic_to_spec(NeoHookean(1.0))
        with pytest.raises(DomainError):
            predict_curve(model, LoadingMode.SHEAR, np.zeros((2, 2)))

    def test_feasibility_error_names_point(self):
        # A log term with the pole inside the control range: the error
        # carries the first offending point index.
        model = ModelSpec.build({9: (1.0, 8.0)})
        controls = np.array([1.05, 1.1, 1.2, 1.3])
        with pytest.raises(FeasibilityError) as info:
            predict_curve(model, LoadingMode.TENSION, controls)
        assert info.value.term_index == 9
        assert info.value.point_index is not None
        x = controls[info.value.point_index] ** 2 \
            + 2.0 / controls[info.value.point_index] - 3.0
        assert 8.0 * x >= 1.0
