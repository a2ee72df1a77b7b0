"""Closed-form Shapley decomposition against the enumeration oracles."""

import numpy as np
import pytest

from mdshapley import (
    DimensionTooLarge,
    IndexOverlap,
    build_model,
    interaction_bruteforce,
    interaction_matrix,
    md2,
    scaled_contributions,
    set_derivative3,
    shapley_bruteforce,
    shapley_value,
)

from helpers import random_instance


class TestShapleyValue:
    def test_reference_example(self, example_model, example_x):
        expl = shapley_value(example_x, example_model)
        assert expl.total == pytest.approx(44.90, abs=0.01)
        np.testing.assert_allclose(
            expl.phi, [0.0, -5.07, 9.87, 15.26, 24.84], atol=0.01
        )

    def test_efficiency(self):
        rng = np.random.default_rng(10)
        for p in (1, 2, 3, 8, 15):
            x, model = random_instance(rng, p)
            expl = shapley_value(x, model)
            assert expl.phi.sum() == pytest.approx(expl.total, rel=1e-12)
            assert expl.total == pytest.approx(md2(x, model), rel=1e-12)

    def test_custom_reference(self):
        rng = np.random.default_rng(11)
        x, model = random_instance(rng, 4)
        ref = rng.standard_normal(4)
        expl = shapley_value(x, model, reference=ref)
        d = x - ref
        assert expl.total == pytest.approx(d @ model.omega @ d, rel=1e-12)
        np.testing.assert_array_equal(expl.reference, ref)

    def test_independent_centered_coordinate_gets_zero(self):
        # A coordinate sitting at the center and uncorrelated with the rest
        # contributes nothing to any coalition.
        sigma = np.array([[2.0, 0.7, 0.0], [0.7, 1.0, 0.0], [0.0, 0.0, 3.0]])
        model = build_model(np.array([1.0, -1.0, 4.0]), sigma)
        x = np.array([3.0, 0.5, 4.0])  # x_2 == mu_2
        expl = shapley_value(x, model)
        assert expl.phi[2] == 0.0
        assert shapley_bruteforce(x, model, 2) == pytest.approx(0.0, abs=1e-14)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(12)
        x, model = random_instance(rng, 5)
        perm = rng.permutation(5)
        permuted = build_model(model.mu[perm], model.sigma[np.ix_(perm, perm)])
        expl = shapley_value(x, model)
        expl_perm = shapley_value(x[perm], permuted)
        np.testing.assert_allclose(expl_perm.phi, expl.phi[perm], rtol=1e-12)

    def test_zero_at_reference(self):
        x, model = random_instance(np.random.default_rng(13), 3)
        expl = shapley_value(model.mu, model)
        np.testing.assert_array_equal(expl.phi, np.zeros(3))
        assert expl.total == 0.0

    def test_model_id_tags_the_model(self):
        x, model = random_instance(np.random.default_rng(14), 3)
        assert shapley_value(x, model).model_id == id(model)


class TestScaledContributions:
    def test_sums_to_distance(self):
        x, model = random_instance(np.random.default_rng(15), 6)
        expl = shapley_value(x, model)
        scaled = scaled_contributions(expl)
        assert scaled.sum() == pytest.approx(np.sqrt(expl.total), rel=1e-12)

    def test_zero_total(self):
        x, model = random_instance(np.random.default_rng(16), 3)
        expl = shapley_value(model.mu, model)
        np.testing.assert_array_equal(scaled_contributions(expl), np.zeros(3))


class TestOracleAgreement:
    def test_shapley_matches_enumeration(self):
        rng = np.random.default_rng(17)
        for p in (1, 2, 3, 5):
            for _ in range(5):
                x, model = random_instance(rng, p)
                expl = shapley_value(x, model)
                brute = [shapley_bruteforce(x, model, k) for k in range(p)]
                np.testing.assert_allclose(expl.phi, brute, atol=1e-10)

    def test_interaction_matches_enumeration(self):
        rng = np.random.default_rng(18)
        for _ in range(5):
            x, model = random_instance(rng, 4)
            inter = interaction_matrix(x, model)
            for j in range(4):
                for k in range(j + 1, 4):
                    brute = interaction_bruteforce(x, model, j, k)
                    assert inter.Phi[j, k] == pytest.approx(brute, abs=1e-10)

    def test_enumeration_limit(self):
        x, model = random_instance(np.random.default_rng(19), 21)
        with pytest.raises(DimensionTooLarge):
            shapley_bruteforce(x, model, 0)
        with pytest.raises(DimensionTooLarge):
            interaction_bruteforce(x, model, 0, 1)
        with pytest.raises(DimensionTooLarge):
            set_derivative3(x, model, 0, 1, 2, ())


class TestInteractionMatrix:
    def test_row_sums_and_grand_total(self):
        rng = np.random.default_rng(20)
        x, model = random_instance(rng, 7)
        expl = shapley_value(x, model)
        inter = interaction_matrix(x, model)
        np.testing.assert_allclose(inter.row_sums(), expl.phi, rtol=1e-12, atol=1e-12)
        assert inter.grand_total() == pytest.approx(expl.total, rel=1e-12)

    def test_symmetry(self):
        x, model = random_instance(np.random.default_rng(21), 6)
        Phi = interaction_matrix(x, model).Phi
        np.testing.assert_allclose(Phi, Phi.T, rtol=1e-12, atol=1e-14)

    def test_off_diagonal_closed_form(self):
        x, model = random_instance(np.random.default_rng(22), 5)
        d = x - model.mu
        Phi = interaction_matrix(x, model).Phi
        for j in range(5):
            for k in range(5):
                if j != k:
                    expected = 2.0 * d[j] * d[k] * model.omega[j, k]
                    assert Phi[j, k] == pytest.approx(expected, rel=1e-12)

    def test_custom_reference(self):
        rng = np.random.default_rng(23)
        x, model = random_instance(rng, 4)
        ref = rng.standard_normal(4)
        inter = interaction_matrix(x, model, reference=ref)
        d = x - ref
        assert inter.grand_total() == pytest.approx(d @ model.omega @ d, rel=1e-12)

    def test_independent_coordinates_have_no_interaction(self):
        model = build_model(np.zeros(2), np.eye(2))
        Phi = interaction_matrix(np.array([2.0, 3.0]), model).Phi
        assert Phi[0, 1] == 0.0
        assert Phi[0, 0] == pytest.approx(4.0)
        assert Phi[1, 1] == pytest.approx(9.0)


class TestSetDerivative3:
    def test_vanishes(self):
        rng = np.random.default_rng(24)
        for _ in range(20):
            p = int(rng.integers(3, 8))
            x, model = random_instance(rng, p)
            triple = rng.choice(p, size=3, replace=False)
            rest = [i for i in range(p) if i not in triple]
            T = tuple(i for i in rest if rng.random() < 0.5)
            value = set_derivative3(x, model, *triple, T)
            assert abs(value) <= 1e-8

    def test_overlap_rejected(self):
        x, model = random_instance(np.random.default_rng(25), 5)
        with pytest.raises(IndexOverlap):
            set_derivative3(x, model, 0, 0, 1, ())
        with pytest.raises(IndexOverlap):
            set_derivative3(x, model, 0, 1, 2, (2,))
        with pytest.raises(IndexOverlap):
            interaction_bruteforce(x, model, 3, 3)
