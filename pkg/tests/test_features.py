import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from test_treebank import trees
from vnsrl.extraction import extract_algorithm1, extract_node_mapping
from vnsrl.features import (DOWN, TEMPLATES, UP, FeatureBundle, FeatureVectorizer, assemble,
                            check_feature_set_algebra, feature_voice, get_feature_set,
                            load_feature_sets, tree_path, _parse_feature_sets)
from vnsrl.treebank import parse_tree

ALL = get_feature_set(TEMPLATES)


def bundle_for(tree, leaf, text):
    pred = tree.leaf(leaf)
    for cand in extract_algorithm1(tree, leaf):
        if tree.text(cand.span, readable=True) == text:
            return assemble(tree, cand, pred, ALL).values
    raise LookupError(text)


def test_golden_no(figure_tree):
    values = bundle_for(figure_tree, 3, "nó")
    assert values["phrase_type"] == "NP"
    assert values["path"] == "NP↑S↓VP↓V"
    assert values["position"] == 0
    assert values["voice"] == 1
    assert values["function_tag"] == "SUB"
    assert values["distance"] == 3
    assert values["predicate_type"] == "V"
    assert values["predicate"] == "là"


def test_golden_head_and_subcat(figure_tree):
    values = bundle_for(figure_tree, 3, "con trai tôi mà")
    assert values["head_word"].replace("_", " ") == "con trai"
    assert values["subcategorization"] == "VP(V, NP)"
    assert values["position"] == 1
    assert values["function_tag"] == "NONE"


def test_passive_voice():
    tree = parse_tree("(S (NP-SUB (P-H tôi)) (VP (V bị) (V-H đánh)))")
    assert feature_voice(tree, tree.leaf(2)) == 0
    active = parse_tree("(S (NP-SUB (P-H tôi)) (VP (V-H đánh) (NP (P-H nó))))")
    assert feature_voice(active, active.leaf(1)) == 1


def test_phi0_templates():
    phi0 = get_feature_set("phi0")
    assert phi0.templates == {"predicate", "phrase_type", "path", "position", "voice",
                              "head_word", "subcategorization"}


@pytest.mark.parametrize("name", ["phi11", "Φ11", "PHI_11", " phi11 "])
def test_set_name_normalization(name):
    assert get_feature_set(name).templates == get_feature_set("phi4").templates - {"subcategorization"}


def test_all_fourteen_sets_load():
    sets = load_feature_sets()
    assert sorted(sets, key=lambda k: int(k[3:])) == [f"phi{i}" for i in range(14)]
    assert sets["phi4"].templates == sets["phi0"].templates | {"function_tag", "distance"}


def test_algebra_violation_detected():
    text = "phi0 = predicate path\nphi4 = phi0 + function_tag\n"
    with pytest.raises(ValueError, match="phi4"):
        _parse_feature_sets(text)


def test_unknown_template_and_set():
    with pytest.raises(ValueError, match="unknown template"):
        _parse_feature_sets("phi0 = predicate colour\n")
    with pytest.raises(ValueError, match="unknown feature set"):
        get_feature_set("phi99")
    with pytest.raises(ValueError, match="unknown feature templates"):
        get_feature_set(["predicate", "colour"])


def test_check_algebra_ignores_missing_sets():
    check_feature_set_algebra({"phi0": get_feature_set("phi0")})


def test_vectorizer_one_hot_and_dense():
    a = FeatureBundle({"phrase_type": "NP", "position": 0}, {"predicate": np.array([0.5, -1.0])})
    b = FeatureBundle({"phrase_type": "VP", "position": 0}, {"predicate": np.array([2.0, 0.0])})
    vec = FeatureVectorizer().fit([a, b])
    assert vec.vocabulary_ == {"phrase_type=NP": 0, "position=0": 1, "phrase_type=VP": 2}
    X = vec.transform([a, b, FeatureBundle({"phrase_type": "PP", "position": 0},
                                           {"predicate": np.zeros(2)})])
    assert sp.issparse(X) and X.shape == (3, 5)
    np.testing.assert_array_equal(X.toarray(), [[1, 1, 0, 0.5, -1.0],
                                                [0, 1, 1, 2.0, 0.0],
                                                [0, 1, 0, 0.0, 0.0]])


def test_vectorizer_dense_dimension_checked():
    vec = FeatureVectorizer().fit([FeatureBundle({}, {"predicate": np.zeros(3)})])
    with pytest.raises(ValueError, match="dimension"):
        vec.vectorize(FeatureBundle({}, {"predicate": np.zeros(2)}))


def test_vectorizer_deterministic(figure_tree):
    pred = figure_tree.leaf(3)
    bundles = [assemble(figure_tree, c, pred) for c in extract_node_mapping(figure_tree, 3)]
    first = FeatureVectorizer().fit(bundles)
    second = FeatureVectorizer().fit(bundles)
    assert first.vocabulary_ == second.vocabulary_
    assert (first.transform(bundles) != second.transform(bundles)).nnz == 0


@settings(max_examples=150, deadline=None)
@given(trees, st.data())
def test_path_and_distance_consistent(text, data):
    tree = parse_tree(text)
    if len(tree) < 2:
        return
    leaf = data.draw(st.integers(0, len(tree) - 1))
    pred = tree.leaf(leaf)
    for cand in extract_node_mapping(tree, leaf):
        values = assemble(tree, cand, pred, ALL).values
        path = values["path"]
        assert values["distance"] == path.count(UP) + path.count(DOWN)
        assert path.startswith(cand.node.phrase_type) and path.endswith(pred.phrase_type)
        arrows = "".join(ch for ch in path if ch in (UP, DOWN))
        assert DOWN + UP not in arrows
        assert values["position"] == (0 if cand.span[1] <= leaf else 1)
        assert tree_path(cand.node, pred) == path
