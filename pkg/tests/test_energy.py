"""Term catalog, strain-energy evaluation, classic embeddings, model files."""

import numpy as np
import numpy.testing as npt
import pytest

from conftest import make_states, random_model
from hyperdiscovery.energy import (
    CATALOG,
    FEASIBILITY_MARGIN,
    PARAMETER_LABELS,
    Activation,
    Demiray,
    Gent,
    ModelSpec,
    MooneyRivlin,
    NeoHookean,
    TermParams,
    classic_to_spec,
    feasibility_bound,
    load_model,
    log_inner_limit,
    model_derivative,
    model_energy,
    model_expression,
    model_to_text,
    parameter_vector,
    save_model,
    term_derivative,
    term_expression,
    term_kind,
    term_value,
    text_to_model,
)
from hyperdiscovery.exceptions import (
    DataError,
    DomainError,
    FeasibilityError,
    ParameterError,
)
from hyperdiscovery.kinematics import invariants_shear, invariants_uniaxial


class TestCatalog:
    def test_twelve_terms(self):
        assert len(CATALOG) == 12
        assert [k.index for k in CATALOG] == list(range(1, 13))

    def test_group_layout(self):
        # 1-4 linear, 5-8 exponential, 9-12 logarithmic; within each group
        # the argument cycles [I1-3], [I2-3], [I1-3]^2, [I2-3]^2.
        activations = [k.activation for k in CATALOG]
        assert activations[:4] == [Activation.LINEAR] * 4
        assert activations[4:8] == [Activation.EXPONENTIAL] * 4
        assert activations[8:] == [Activation.LOGARITHMIC] * 4
        for group in (CATALOG[:4], CATALOG[4:8], CATALOG[8:]):
            assert [(k.invariant, k.power) for k in group] == [
                (1, 1), (2, 1), (1, 2), (2, 2)]

    def test_inner_slots(self):
        for kind in CATALOG:
            if kind.is_linear:
                assert kind.inner_slot is None
            else:
                assert kind.inner_slot == kind.index + 8

    def test_term_kind_lookup(self):
        assert term_kind(7) is CATALOG[6]
        for bad in (0, 13, -1):
            with pytest.raises(DomainError):
                term_kind(bad)


class TestTermParams:
    def test_rejects_negative(self):
        with pytest.raises(ParameterError):
            TermParams(-0.1)
        with pytest.raises(ParameterError):
            TermParams(1.0, -2.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ParameterError):
            TermParams(float("nan"))


class TestModelSpec:
    def test_build_and_order(self):
        model = ModelSpec.build({6: (0.1, 2.0), 1: 0.5})
        assert model.indices == (1, 6)
        assert model.params(1).outer == 0.5
        assert model.params(6).inner == 2.0

    def test_nonlinear_requires_inner(self):
        with pytest.raises(ParameterError):
            ModelSpec.build({5: 0.3})

    def test_linear_rejects_inner(self):
        with pytest.raises(ParameterError):
            ModelSpec.build({1: (0.5, 2.0)})

    def test_n_parameters(self):
        model = ModelSpec.build({1: 0.5, 2: 0.1, 5: (0.2, 1.0)})
        assert model.n_parameters == 4
        assert len(model) == 3
        assert 5 in model and 9 not in model

    def test_empty_model(self):
        model = ModelSpec({})
        assert model.n_parameters == 0
        assert model.energy(3.2, 3.1) == 0.0

    def test_equality_and_hash(self):
        a = ModelSpec.build({1: 0.5})
        b = ModelSpec.build({1: 0.5})
        assert a == b and hash(a) == hash(b)
        assert a != ModelSpec.build({1: 0.6})


class TestTermValues:
    def test_linear_first_invariant(self):
        kind = term_kind(1)
        npt.assert_allclose(term_value(kind, TermParams(0.5), 5.0, 4.25), 1.0)
        npt.assert_allclose(
            term_derivative(kind, TermParams(0.5), 5.0, 4.25), (0.5, 0.0))

    def test_linear_squared(self):
        kind = term_kind(3)
        value = term_value(kind, TermParams(2.0), 3.3, 3.0)
        npt.assert_allclose(value, 2.0 * 0.3 ** 2, rtol=1e-14)
        dd = term_derivative(kind, TermParams(2.0), 3.3, 3.0)
        npt.assert_allclose(dd, (2.0 * 2.0 * 0.3, 0.0), rtol=1e-14)

    def test_exponential_reported_constants(self):
        # Weights from a published brain-cortex fit on the exp([I2-3])
        # term: value and derivative at gamma = 0.2 (I2 - 3 = 0.04).
        kind = term_kind(6)
        params = TermParams(0.02443, 22.1110)
        value = term_value(kind, params, 3.0, 3.04)
        npt.assert_allclose(value, 0.02443 * np.expm1(22.1110 * 0.04),
                            rtol=1e-14)
        npt.assert_allclose(value, 0.03473036959893885, rtol=1e-12)
        d1, d2 = term_derivative(kind, params, 3.0, 3.04)
        assert d1 == 0.0
        npt.assert_allclose(d2, 1.3080949322021365, rtol=1e-12)

    def test_logarithmic_value(self):
        kind = term_kind(9)
        params = TermParams(1.5, 2.0)
        value = term_value(kind, params, 3.2, 3.0)
        npt.assert_allclose(value, -1.5 * np.log(1.0 - 2.0 * 0.2), rtol=1e-14)
        d1, _ = term_derivative(kind, params, 3.2, 3.0)
        npt.assert_allclose(d1, 1.5 * 2.0 / (1.0 - 0.4), rtol=1e-14)

    def test_squared_argument_chain_rule(self):
        kind = term_kind(8)  # exp of [I2-3]^2
        params = TermParams(0.7, 3.0)
        x = 0.25
        u = x * x
        _, d2 = term_derivative(kind, params, 3.0, 3.0 + x)
        npt.assert_allclose(d2, 0.7 * 3.0 * 2.0 * x * np.exp(3.0 * u),
                            rtol=1e-14)

    def test_array_broadcast(self):
        kind = term_kind(5)
        params = TermParams(0.2, 1.5)
        i1 = np.array([3.0, 3.1, 3.2])
        values = term_value(kind, params, i1, np.full(3, 3.0))
        npt.assert_allclose(values, 0.2 * np.expm1(1.5 * (i1 - 3.0)),
                            rtol=1e-14)

    def test_zero_at_reference(self):
        rng = np.random.default_rng(7)
        states = make_states()
        for _ in range(50):
            model = random_model(rng, states)
            assert model.energy(3.0, 3.0) == 0.0

    def test_model_energy_sums_terms(self):
        model = ModelSpec.build({1: 0.5, 9: (0.3, 1.0)})
        total = model_energy(model, 3.2, 3.1)
        parts = sum(term_value(k, p, 3.2, 3.1) for k, p in model.terms)
        npt.assert_allclose(total, parts, rtol=1e-15)

    def test_model_derivative_sums_terms(self):
        model = ModelSpec.build({2: 0.4, 6: (0.2, 2.0)})
        d1, d2 = model_derivative(model, 3.1, 3.3)
        npt.assert_allclose(d1, 0.0, atol=1e-15)
        expected = 0.4 + 0.2 * 2.0 * np.exp(2.0 * 0.3)
        npt.assert_allclose(d2, expected, rtol=1e-14)


class TestFiniteDifferenceDerivatives:
    def test_random_models(self):
        rng = np.random.default_rng(42)
        states = make_states()
        h = 1e-7
        checked = 0
        for _ in range(60):
            model = random_model(rng, states)
            for mode, control in states[::3]:
                if mode.value == "shr":
                    st = invariants_shear(control)
                else:
                    st = invariants_uniaxial(control)
                d1, d2 = model_derivative(model, st.i1, st.i2)
                fd1 = (model_energy(model, st.i1 + h, st.i2)
                       - model_energy(model, st.i1 - h, st.i2)) / (2 * h)
                fd2 = (model_energy(model, st.i1, st.i2 + h)
                       - model_energy(model, st.i1, st.i2 - h)) / (2 * h)
                scale = abs(d1) + abs(d2) + 1e-12
                assert abs(d1 - fd1) / scale < 1e-6
                assert abs(d2 - fd2) / scale < 1e-6
                checked += 1
        assert checked >= 300


class TestConvexity:
    def test_second_derivative_nonnegative(self):
        # Every catalog activation with non-negative coefficients must be
        # convex and non-decreasing in its invariant over the feasible
        # range; probed by centred second differences.
        rng = np.random.default_rng(3)
        xs = np.linspace(0.0, 0.4, 21)[1:-1]
        h = 1e-4
        for kind in CATALOG:
            for _ in range(10):
                outer = float(rng.uniform(0.01, 2.0))
                if kind.is_linear:
                    params = TermParams(outer)
                else:
                    params = TermParams(outer, float(rng.uniform(0.05, 1.2)))
                for x in xs:
                    if kind.invariant == 1:
                        args = lambda v: (3.0 + v, 3.0)
                    else:
                        args = lambda v: (3.0, 3.0 + v)
                    f = lambda v: term_value(kind, params, *args(v))
                    second = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
                    first = (f(x + h) - f(x - h)) / (2.0 * h)
                    scale = max(1.0, abs(f(x)))
                    assert second >= -1e-6 * scale
                    assert first >= -1e-9 * scale


class TestDomainHandling:
    def test_below_reference_raises(self):
        kind = term_kind(1)
        with pytest.raises(DomainError):
            term_value(kind, TermParams(1.0), 2.9, 3.0)

    def test_tiny_negative_shift_clamps(self):
        kind = term_kind(1)
        value = term_value(kind, TermParams(1.0), 3.0 - 1e-12, 3.0)
        assert value == 0.0

    def test_log_pole_raises_feasibility(self):
        kind = term_kind(9)
        params = TermParams(1.0, 10.0)
        with pytest.raises(FeasibilityError) as info:
            term_value(kind, params, 3.2, 3.0)  # a*x = 2 > 1
        assert info.value.term_index == 9

    def test_log_at_pole_raises(self):
        kind = term_kind(9)
        x = 0.2
        with pytest.raises(FeasibilityError):
            term_value(kind, TermParams(1.0, 1.0 / x), 3.0 + x, 3.0)

    def test_log_inside_pole_is_finite(self):
        # Point evaluation only rejects the singularity itself; the safety
        # margin applies to the planning bound, not to evaluation.
        kind = term_kind(9)
        x = 0.2
        inner = (1.0 - FEASIBILITY_MARGIN / 2) / x
        assert np.isfinite(term_value(kind, TermParams(1.0, inner),
                                      3.0 + x, 3.0))


class TestFeasibility:
    def test_log_inner_limit(self):
        kind = term_kind(9)
        npt.assert_allclose(log_inner_limit(kind, 0.1, 0.2),
                            (1.0 - FEASIBILITY_MARGIN) / 0.1, rtol=1e-12)
        kind12 = term_kind(12)  # log of [I2-3]^2
        npt.assert_allclose(log_inner_limit(kind12, 0.1, 0.2),
                            (1.0 - FEASIBILITY_MARGIN) / 0.04, rtol=1e-12)

    def test_limit_infinite_for_exp(self):
        assert np.isinf(log_inner_limit(term_kind(5), 0.5, 0.5))

    def test_feasibility_bound_flags_violation(self):
        model = ModelSpec.build({9: (1.0, 6.0)})
        report = feasibility_bound(model, 0.2, 0.2)  # a*x = 1.2 >= 1
        assert not report.ok and not bool(report)
        assert report.violations[0].term_index == 9
        npt.assert_allclose(report.violations[0].limit,
                            (1.0 - FEASIBILITY_MARGIN) / 0.2, rtol=1e-12)

    def test_feasibility_bound_clean(self):
        model = ModelSpec.build({9: (1.0, 2.0), 5: (0.1, 50.0)})
        report = feasibility_bound(model, 0.2, 0.2)
        assert report.ok and bool(report)
        assert report.violations == ()


class TestClassicModels:
    def test_neo_hookean_embedding(self):
        spec = classic_to_spec(NeoHookean(1.0))
        assert spec.indices == (1,)
        assert spec.params(1).outer == 0.5

    def test_mooney_rivlin_embedding(self):
        spec = classic_to_spec(MooneyRivlin(1.0, 0.2))
        assert spec.indices == (1, 2)
        npt.assert_allclose(spec.params(1).outer, 0.3, rtol=1e-15)
        npt.assert_allclose(spec.params(2).outer, 0.2, rtol=1e-15)

    def test_mooney_rivlin_constraint(self):
        with pytest.raises(ParameterError):
            MooneyRivlin(1.0, 0.6)  # c2 > mu/2 makes b1 negative

    def test_demiray_embedding(self):
        spec = classic_to_spec(Demiray(1.0, 5.0))
        assert spec.indices == (5,)
        npt.assert_allclose(spec.params(5).outer, 0.1, rtol=1e-15)
        npt.assert_allclose(spec.params(5).inner, 5.0, rtol=1e-15)

    def test_gent_embedding(self):
        spec = classic_to_spec(Gent(1.0, 2.0))
        assert spec.indices == (9,)
        npt.assert_allclose(spec.params(9).outer, 1.0, rtol=1e-15)
        npt.assert_allclose(spec.params(9).inner, 0.5, rtol=1e-15)

    def test_gent_energy_matches_closed_form(self):
        mu, eta = 0.8, 3.0
        spec = classic_to_spec(Gent(mu, eta))
        x = 0.5
        expected = -(mu * eta / 2.0) * np.log(1.0 - x / eta)
        npt.assert_allclose(model_energy(spec, 3.0 + x, 3.0), expected,
                            rtol=1e-14)

    def test_demiray_energy_matches_closed_form(self):
        mu, beta = 1.3, 4.0
        spec = classic_to_spec(Demiray(mu, beta))
        x = 0.2
        expected = (mu / (2.0 * beta)) * np.expm1(beta * x)
        npt.assert_allclose(model_energy(spec, 3.0 + x, 3.0), expected,
                            rtol=1e-14)

    def test_positive_moduli_required(self):
        for bad in (NeoHookean, lambda: Demiray(-1.0, 2.0),
                    lambda: Gent(1.0, -2.0)):
            with pytest.raises((ParameterError, TypeError)):
                bad(-1.0) if bad is NeoHookean else bad()


class TestModelFiles:
    def test_text_roundtrip_exact(self):
        model = ModelSpec.build({
            1: 1.0 / 3.0, 6: (0.02443, 22.1110), 12: (1e-7, 123.456789)})
        text = model_to_text(model)
        back = text_to_model(text)
        assert back == model
        for (_, p), (_, q) in zip(model.terms, back.terms):
            assert p.outer == q.outer and p.inner == q.inner

    def test_file_roundtrip(self, tmp_path):
        model = ModelSpec.build({5: (0.1, 5.0)})
        path = tmp_path / "model.txt"
        save_model(path, model)
        assert load_model(path) == model

    def test_linear_line_has_empty_inner(self):
        text = model_to_text(ModelSpec.build({1: 0.5}))
        assert text == "1,0.5,\n"

    def test_malformed_line_reports_line_number(self):
        with pytest.raises(DataError) as info:
            text_to_model("1,0.5,\nbogus line\n")
        assert "2" in str(info.value)

    def test_duplicate_term_rejected(self):
        with pytest.raises(DataError):
            text_to_model("1,0.5,\n1,0.25,\n")

    def test_unknown_index_rejected(self):
        with pytest.raises(DataError):
            text_to_model("13,0.5,\n")


class TestExpressions:
    def test_labels(self):
        assert PARAMETER_LABELS[0] == "b_1"
        assert PARAMETER_LABELS[-1] == "b_20"
        assert len(PARAMETER_LABELS) == 20

    def test_term_expression_symbolic(self):
        assert term_expression(term_kind(9)) == "-b*ln(1-a*[I1-3])"
        assert "exp" in term_expression(term_kind(5))
        assert "[I2-3]^2" in term_expression(term_kind(4))

    def test_model_expression_values(self):
        model = ModelSpec.build({1: 0.5, 6: (0.02443, 22.1110)})
        expr = model_expression(model)
        assert expr == "0.5*[I1-3] + 0.02443*(exp(22.111*[I2-3])-1)"

    def test_parameter_vector_layout(self):
        model = ModelSpec.build({1: 0.5, 6: (0.02443, 22.1110)})
        vec = parameter_vector(model)
        assert vec.shape == (20,)
        assert vec[0] == 0.5          # b_1: outer of term 1
        assert vec[5] == 0.02443      # b_6: outer of term 6
        assert vec[13] == 22.1110     # b_14: inner of term 6
        assert np.count_nonzero(vec) == 3
