import copy
import io
import json

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from vnsrl.corpus import generate_corpus, propositions
from vnsrl.embeddings import EmbeddingTable
from vnsrl.inference import violations
from vnsrl.learning import NULL, predict_2step
from vnsrl.pipeline import SemanticRoleLabeler, load_model, save_model


@pytest.fixture(scope="module")
def data():
    X, y, _ = propositions(generate_corpus(120, seed=3))
    return X[:90], y[:90], X[90:], y[90:]


@pytest.fixture(scope="module")
def fitted(data):
    X, y, _, _ = data
    return SemanticRoleLabeler(n_epochs=10).fit(X, y)


def test_fit_predict_quality(fitted, data):
    _, _, Xt, yt = data
    assert fitted.score(Xt, yt) > 0.9
    for labels in fitted.predict(Xt):
        assert all(role != NULL for _, role in labels)


def test_params_and_clone():
    est = SemanticRoleLabeler(classifier="maxent", strategy="2step", feature_set="Φ4")
    params = est.get_params()
    assert params["classifier"] == "maxent" and params["feature_set"] == "Φ4"
    assert clone(est).get_params() == params


def test_unfitted_raises(data):
    with pytest.raises(NotFittedError):
        SemanticRoleLabeler().predict(data[2])


def test_bad_strategy(data):
    with pytest.raises(ValueError, match="strategy"):
        SemanticRoleLabeler(strategy="3step").fit(data[0], data[1])


def test_decoded_output_feasible(fitted, data):
    for lp in fitted.label_propositions(data[2]):
        assert violations(lp.problem, lp.labels) == []


def test_no_ilp_equals_independent_argmax(fitted, data):
    free = copy.deepcopy(fitted).set_params(use_ilp=False)
    for lp in free.label_propositions(data[2]):
        assert lp.labels == tuple(lp.problem.roles[k] for k in np.argmax(lp.problem.scores, axis=1))


def test_two_step_unconstrained_matches_pipeline(data):
    X, y, Xt, _ = data
    model = SemanticRoleLabeler(strategy="2step", use_ilp=False, n_epochs=10).fit(X, y)
    _, bundles, _ = model._featurize(Xt)
    expected = predict_2step(model.id_model_, model.cls_model_, model.vectorizer_.transform(bundles))
    got = [lab for lp in model.label_propositions(Xt) for lab in lp.labels]
    assert got == list(expected)


@pytest.mark.parametrize("params", [
    {"classifier": "maxent"},
    {"strategy": "2step"},
    {"extractor": "pruning"},
    {"extractor": "node_mapping", "feature_set": "phi0"},
])
def test_configurations_run(data, params):
    X, y, Xt, yt = data
    model = SemanticRoleLabeler(n_epochs=5, **params).fit(X, y)
    assert 0.0 <= model.score(Xt, yt) <= 1.0


def test_save_load_round_trip(fitted, data):
    buf = io.StringIO()
    save_model(fitted, buf)
    restored = load_model(io.StringIO(buf.getvalue()))
    assert restored.predict(data[2]) == fitted.predict(data[2])
    assert json.loads(buf.getvalue())["format"] == "vnsrl-model"


def test_load_rejects_other_files():
    with pytest.raises(ValueError, match="not a model"):
        load_model(io.StringIO('{"format": "other"}'))
    with pytest.raises(ValueError, match="version"):
        load_model(io.StringIO('{"format": "vnsrl-model", "version": 99}'))


def test_trace_lines(fitted, data):
    buf = io.StringIO()
    fitted.predict(data[2][:3], trace=buf)
    records = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert len(records) == 3
    assert set(records[0]) == {"proposition", "predicate", "problem", "labels", "objective"}


def test_embedding_substitution_requires_template(data):
    table = EmbeddingTable(2, {"ăn": np.ones(2)})
    with pytest.raises(ValueError, match="not in feature set"):
        SemanticRoleLabeler(feature_set="phi12", predicate_embeddings=table).fit(data[0], data[1])


def test_embedding_model_round_trip(data):
    X, y, Xt, _ = data
    rng = np.random.default_rng(0)
    words = {tree.leaf(leaf).token.lower() for tree, leaf in X}
    table = EmbeddingTable(4, {w: rng.standard_normal(4) for w in sorted(words)})
    model = SemanticRoleLabeler(n_epochs=5, predicate_embeddings=table).fit(X, y)
    assert model.vectorizer_.dense_dims_ == {"predicate": 4}
    buf = io.StringIO()
    save_model(model, buf)
    assert load_model(io.StringIO(buf.getvalue())).predict(Xt) == model.predict(Xt)
