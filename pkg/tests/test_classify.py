import numpy as np
import pytest

from morphtda.classify import (
    SvmModel,
    TrainConfig,
    kernel,
    predict,
    predict_many,
    train_svm,
)
from morphtda.errors import DimensionMismatch, NonFiniteFeature, ParseError, SingleClass
from morphtda.featurize import FeatureVector
from oracles import cubic_separable


@pytest.fixture(scope="module")
def separable():
    X, y = cubic_separable(np.random.default_rng(3))
    cfg = TrainConfig(C=10.0, standardize=False)
    return X, y, cfg, train_svm(X, y, cfg)


@pytest.mark.parametrize("u,v,want", [([0, 0], [0, 0], 1.0), ([1, 0], [1, 0], 8.0),
                                      ([1, 2], [3, -1], 8.0)])
def test_kernel_examples(u, v, want):
    assert kernel(u, v) == want


def test_kernel_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        kernel([1, 2], [1, 2, 3])


def test_two_points():
    model = train_svm([[0.0, 1.0], [2.0, -1.0]], ["genuine", "morph"], TrainConfig(standardize=False))
    assert len(model.dual_coefs) == 2
    assert predict_many(model, [[0.0, 1.0], [2.0, -1.0]]) == ["genuine", "morph"]


def test_cubic_separable_training_accuracy(separable):
    X, y, _, model = separable
    assert np.all(np.sign(model.decision_function(X)) == y)


def test_dual_feasibility(separable):
    _, _, cfg, model = separable
    assert abs(model.dual_coefs.sum()) <= 1e-9
    assert np.all(np.abs(model.dual_coefs) <= cfg.C + 1e-12)
    assert np.all(np.abs(model.dual_coefs) > 1e-12)


def test_free_support_vectors_on_margin(separable):
    _, _, cfg, model = separable
    free = (np.abs(model.dual_coefs) > 1e-8) & (np.abs(model.dual_coefs) < cfg.C - 1e-8)
    assert free.any()
    y = np.sign(model.dual_coefs[free])
    scores = model.decision_function(model.support_vectors[free])
    assert np.all(np.abs(y * scores - 1) <= cfg.kkt_tolerance)


def test_standardized_fit_also_separates():
    X, y = cubic_separable(np.random.default_rng(11))
    model = train_svm(X, y, TrainConfig(C=10.0))
    assert model.mean is not None
    assert np.all(np.sign(model.decision_function(X)) == y)


def test_deterministic_given_seed():
    X, y = cubic_separable(np.random.default_rng(5), n=80)
    a = train_svm(X, y, TrainConfig(seed=4))
    b = train_svm(X, y, TrainConfig(seed=4))
    assert a.to_json() == b.to_json()


def test_support_vector_order_irrelevant(separable, rng):
    X, _, _, model = separable
    perm = rng.permutation(len(model.dual_coefs))
    shuffled = SvmModel(model.support_vectors[perm], model.dual_coefs[perm], model.bias,
                        mean=model.mean, std=model.std)
    assert np.allclose(shuffled.decision_function(X), model.decision_function(X), atol=1e-9)


def test_empty_support_set_scores_bias():
    model = SvmModel(np.empty((0, 3)), np.empty(0), bias=-0.25)
    assert predict(model, [1.0, 2.0, 3.0]) == ("genuine", -0.25)


def test_tie_maps_to_genuine():
    model = SvmModel(np.empty((0, 2)), np.empty(0), bias=0.0)
    assert predict(model, [0.0, 0.0])[0] == "genuine"


def test_predict_dimension_mismatch(separable):
    with pytest.raises(DimensionMismatch):
        predict(separable[3], [1.0, 2.0, 3.0])


def test_training_errors():
    with pytest.raises(SingleClass):
        train_svm([[0.0], [1.0]], ["morph", "morph"])
    with pytest.raises(NonFiniteFeature):
        train_svm([[0.0], [np.inf]], ["morph", "genuine"])
    with pytest.raises(ValueError):
        TrainConfig(C=0)


def test_feature_vectors_as_input():
    vecs = [FeatureVector("BS_D0", np.full(10, float(k)), f"s{k}", "morph" if k > 2 else "genuine")
            for k in range(6)]
    model = train_svm(vecs, None)
    assert predict_many(model, [v.values for v in vecs]) == [v.label for v in vecs]


def test_json_roundtrip_bit_exact(separable, rng):
    model = train_svm(*cubic_separable(rng, n=60), TrainConfig())
    again = SvmModel.from_json(model.to_json())
    assert np.array_equal(again.support_vectors, model.support_vectors)
    assert np.array_equal(again.dual_coefs, model.dual_coefs)
    assert np.array_equal(again.mean, model.mean) and np.array_equal(again.std, model.std)
    assert again.bias == model.bias
    probe = rng.normal(size=(20, 2))
    assert np.array_equal(again.decision_function(probe), model.decision_function(probe))
    with pytest.raises(ParseError):
        SvmModel.from_json('{"bias": 1}')
