# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import numpy as np
import pytest

from src.pooled_stego_lab.errors import (
    ConfigFileError,
    ConfigMismatchError,
    ParameterError,
    TrainingError,
)
from src.pooled_stego_lab.pooling import (
    LinearModel,
    fit_parzen_config,
    hinge_objective,
    model_from_dict,
    model_to_dict,
    svm_margin,
    svm_margins,
    train_linear_svm,
)


def blobs(n=100, p=10, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack(
        [rng.normal(-0.5, 0.1, size=(n, p)), rng.normal(0.5, 0.1, size=(n, p))]
    )
    y = np.concatenate([-np.ones(n), np.ones(n)])
    return X, y


def test_one_dimensional_separable_pair():
    model = train_linear_svm([[0.0], [1.0]], [-1, 1])
    assert svm_margin(model, np.array([0.0])) < 0 < svm_margin(model, np.array([1.0]))


def test_blobs_are_classified():
    X, y = blobs()
    model = train_linear_svm(X, y, log_every=1)
    accuracy = np.mean(np.sign(svm_margins(model, X)) == y)
    assert accuracy >= 0.99


def test_dual_objective_never_increases():
    X, y = blobs(seed=1)
    model = train_linear_svm(X, y, log_every=1)
    history = np.array(model.objective_history)
    assert history.size > 2
    assert np.all(np.diff(history) <= 1e-12)


def test_converged_model_has_small_kkt_gap():
    X, y = blobs(seed=2)
    model = train_linear_svm(X, y, tol=1e-5)
    assert model.kkt_gap < 1e-5


def test_primal_and_dual_objectives_meet():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(80, 5))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=80) > 0, 1.0, -1.0)
    model = train_linear_svm(X, y, C=1.0, tol=1e-6)
    primal = hinge_objective(model, X, y, C=1.0)
    dual = -model.objective_history[-1]
    assert primal >= dual - 1e-9
    assert primal - dual <= 1e-2 * max(1.0, abs(primal))


def test_flipping_labels_negates_the_weights():
    X, y = blobs(seed=3)
    model = train_linear_svm(X, y)
    flipped = train_linear_svm(X, -y)
    assert np.allclose(flipped.weights, -model.weights, atol=1e-3)
    assert flipped.intercept == pytest.approx(-model.intercept, abs=1e-3)


def test_example_weight_counts_as_copies():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(60, 4))
    y = np.where(X[:, 0] + 0.7 * rng.normal(size=60) > 0, 1.0, -1.0)
    weights = np.where(y < 0, 3.0, 1.0)
    copied = np.vstack([X] + [X[y < 0]] * 2)
    copied_y = np.concatenate([y] + [y[y < 0]] * 2)
    weighted = train_linear_svm(X, y, tol=1e-7, weights=weights)
    duplicated = train_linear_svm(copied, copied_y, tol=1e-7)
    assert np.allclose(weighted.weights, duplicated.weights, atol=1e-3)
    assert hinge_objective(weighted, X, y, weights=weights) == pytest.approx(
        hinge_objective(duplicated, copied, copied_y), rel=1e-4
    )


@pytest.mark.parametrize("weights", [np.ones(3), -np.ones(4), [1.0, np.nan, 1, 1]])
def test_bad_example_weights_are_rejected(weights):
    X = np.array([[0.0], [0.2], [0.8], [1.0]])
    with pytest.raises(TrainingError):
        train_linear_svm(X, [-1, -1, 1, 1], weights=weights)


def test_single_class_cannot_be_trained():
    X, _ = blobs(n=5)
    with pytest.raises(TrainingError):
        train_linear_svm(X, np.ones(10))


def test_labels_must_be_signs():
    X, y = blobs(n=5)
    with pytest.raises(TrainingError):
        train_linear_svm(X, np.where(y > 0, 1, 0))
    with pytest.raises(TrainingError):
        train_linear_svm(X, y[:-1])


def test_non_positive_cost_is_rejected():
    X, y = blobs(n=5)
    with pytest.raises(ParameterError):
        train_linear_svm(X, y, C=0.0)


def test_margin_examples():
    assert svm_margin(LinearModel(np.zeros(4), 0.3), np.ones(4)) == pytest.approx(0.3)
    model = LinearModel(np.array([1.0, 0.0, 0.0]), 0.0)
    assert svm_margin(model, np.array([0.5, 0.2, 0.9])) == pytest.approx(0.5)


def test_margin_checks_dimension():
    with pytest.raises(ConfigMismatchError):
        svm_margin(LinearModel(np.zeros(4)), np.ones(3))
    with pytest.raises(ConfigMismatchError):
        svm_margins(LinearModel(np.zeros(4)), np.ones((2, 3)))


def test_model_dict_restores_pooler():
    config = fit_parzen_config([0.0, 1.0], p=4)
    model = LinearModel(np.array([0.5, -1.0, 2.0, 0.25]), -0.1, 0.05)
    data = model_to_dict(model, config, "scores")
    assert data["p"] == 4
    restored, restored_config, domain = model_from_dict(data)
    assert np.array_equal(restored.weights, model.weights)
    assert restored.intercept == -0.1
    assert restored.delta == 0.05
    assert np.array_equal(restored_config.centers, config.centers)
    assert domain == "scores"


def test_model_dict_with_inconsistent_p():
    config = fit_parzen_config([0.0, 1.0], p=4)
    data = model_to_dict(LinearModel(np.zeros(4)), config)
    with pytest.raises(ConfigMismatchError):
        model_from_dict({**data, "p": 5})
    with pytest.raises(ConfigMismatchError):
        model_from_dict({**data, "weights": [0.0, 0.0, 0.0]})
    with pytest.raises(ConfigFileError) as excinfo:
        model_from_dict({k: v for k, v in data.items() if k != "gamma"}, "m.json")
    assert "gamma" in str(excinfo.value)
    assert excinfo.value.path == "m.json"
    with pytest.raises(ConfigFileError):
        model_from_dict({**data, "centers": [1.0, 0.0, 2.0, 3.0]})
