import numpy as np
import pytest

from vnsrl.embeddings import (EmbeddingTable, embed_tokens, lexical_words, load_embeddings,
                              project_2d, substitute_embedding)
from vnsrl.features import FeatureBundle


def write(tmp_path, text, name="vec.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_with_header(tmp_path):
    table = load_embeddings(write(tmp_path, "2 3\ncon 1 2 3\nTrai 0.5 0 -1\n"))
    assert table.dimension == 3 and len(table) == 2
    np.testing.assert_array_equal(table["trai"], [0.5, 0, -1])
    np.testing.assert_array_equal(table["Con"], [1, 2, 3])


def test_load_without_header(tmp_path):
    table = load_embeddings(write(tmp_path, "a 1 0\nb 0 1\n\n"))
    assert table.dimension == 2 and list(table.entries) == ["a", "b"]


def test_ragged_line_reports_line_number(tmp_path):
    with pytest.raises(ValueError, match=r":3: expected 2 values, found 3"):
        load_embeddings(write(tmp_path, "a 1 0\nb 0 1\nc 1 2 3\n"))


def test_non_numeric_component(tmp_path):
    with pytest.raises(ValueError, match=r":2: non-numeric"):
        load_embeddings(write(tmp_path, "a 1 0\nb x 1\n"))


def test_empty_file(tmp_path):
    with pytest.raises(ValueError, match="no vectors"):
        load_embeddings(write(tmp_path, "\n"))


def test_duplicate_and_header_mismatch_warn(tmp_path):
    with pytest.warns(UserWarning) as record:
        table = load_embeddings(write(tmp_path, "3 2\na 1 0\na 0 1\n"))
    messages = " ".join(str(w.message) for w in record)
    assert "duplicate word" in messages and "header declares 3" in messages
    np.testing.assert_array_equal(table["a"], [0, 1])


def test_table_dimension_checked():
    with pytest.raises(ValueError):
        EmbeddingTable(3, {"a": np.zeros(2)})


def test_average_counts_unknown_as_zero():
    table = EmbeddingTable(2, {"con": np.array([1.0, 3.0]), "trai": np.array([3.0, 5.0])})
    np.testing.assert_array_equal(embed_tokens(["con", "trai"], table), [2.0, 4.0])
    np.testing.assert_array_equal(embed_tokens(["con", "xyz"], table), [0.5, 1.5])
    np.testing.assert_array_equal(embed_tokens([], table), [0.0, 0.0])


def test_lexical_words_prefers_whole_token():
    table = EmbeddingTable(1, {"con_trai": np.ones(1), "con": np.zeros(1)})
    assert lexical_words("con_trai", table) == ["con_trai"]
    assert lexical_words("sinh_viên", table) == ["sinh", "viên"]


def test_substitution_replaces_template():
    table = EmbeddingTable(2, {"con": np.array([1.0, 3.0]), "trai": np.array([3.0, 5.0])})
    bundle = FeatureBundle({"predicate": "là", "head_word": "con_trai", "position": 0})
    out = substitute_embedding(bundle, "headword", table)
    assert "head_word" not in out.values and out.values["predicate"] == "là"
    np.testing.assert_array_equal(out.dense["head_word"], [2.0, 4.0])
    assert bundle.values["head_word"] == "con_trai"  # input left untouched
    with pytest.raises(ValueError):
        substitute_embedding(FeatureBundle({"position": 0}), "predicate", table)
    with pytest.raises(ValueError):
        substitute_embedding(bundle, "path", table)


def _eigh_oracle(X):
    Xc = X - X.mean(axis=0)
    _, vecs = np.linalg.eigh(Xc.T @ Xc)
    axes = []
    for v in (vecs[:, -1], vecs[:, -2]):
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        axes.append(v)
    return Xc @ np.column_stack(axes)


def random_table(seed, n=12, dim=6):
    rng = np.random.default_rng(seed)
    scales = np.array([5.0, 3.0, 1.0, 0.5, 0.2, 0.1])[:dim]
    words = [f"w{i}" for i in range(n)]
    return EmbeddingTable(dim, {w: rng.standard_normal(dim) * scales for w in words}), words


@pytest.mark.parametrize("seed", range(5))
def test_projection_matches_covariance_eigenvectors(seed):
    table, words = random_table(seed)
    coords = np.array([(x, y) for _, x, y in project_2d(table, words)])
    expected = _eigh_oracle(np.vstack([table[w] for w in words]))
    np.testing.assert_allclose(coords, expected, atol=1e-6)


def test_projection_shift_invariant():
    table, words = random_table(7)
    shifted = EmbeddingTable(table.dimension, {w: v + 10.0 for w, v in table.entries.items()})
    a = np.array([p[1:] for p in project_2d(table, words)])
    b = np.array([p[1:] for p in project_2d(shifted, words)])
    np.testing.assert_allclose(a, b, atol=1e-6)


def test_projection_errors():
    table, words = random_table(0)
    with pytest.raises(ValueError, match="at least 3"):
        project_2d(table, words[:2])
    flat = EmbeddingTable(2, {w: np.ones(2) for w in "abc"})
    with pytest.raises(ValueError, match="zero variance"):
        project_2d(flat, list("abc"))


def test_projection_deterministic():
    table, words = random_table(3)
    assert project_2d(table, words) == project_2d(table, words)
