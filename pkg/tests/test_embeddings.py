import numpy as np
import pytest

from weblearn.embeddings import EmbeddingTable, load_embeddings
from weblearn.errors import DataError


def _write(tmp_path, text, name="vecs.txt"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_basic_load(tmp_path):
    path = _write(tmp_path, "dog 1 0 0\nwalk 0 2 0\n")
    table = load_embeddings(path)
    assert len(table) == 2
    assert table.dim == 3
    np.testing.assert_allclose(table.lookup("walk"), [0, 1, 0])  # unit normalized


def test_header_line_accepted(tmp_path):
    path = _write(tmp_path, "2 3\ndog 1 0 0\nwalk 0 1 0\n")
    table = load_embeddings(path)
    assert len(table) == 2 and table.dim == 3


def test_wrong_arity_reports_line(tmp_path):
    path = _write(tmp_path, "dog 1 0 0\nwalk 0 1\n")
    with pytest.raises(DataError, match="line 2"):
        load_embeddings(path)


def test_zero_norm_rejected(tmp_path):
    path = _write(tmp_path, "dog 0 0 0\n")
    with pytest.raises(DataError, match="zero norm"):
        load_embeddings(path)


def test_duplicate_warns_last_wins(tmp_path):
    path = _write(tmp_path, "dog 1 0 0\ndog 0 1 0\n")
    with pytest.warns(UserWarning, match="duplicate"):
        table = load_embeddings(path)
    np.testing.assert_allclose(table.lookup("dog"), [0, 1, 0])


def test_empty_file_rejected(tmp_path):
    path = _write(tmp_path, "")
    with pytest.raises(DataError):
        load_embeddings(path)


def test_from_pairs_dim_mismatch():
    with pytest.raises(DataError, match="dim"):
        EmbeddingTable.from_pairs({"a": [1.0, 0.0], "b": [1.0, 0.0, 0.0]})


def test_lookup_falls_back_to_stem():
    table = EmbeddingTable.from_pairs({"walk": [0.0, 1.0]})
    np.testing.assert_allclose(table.lookup("walking"), [0.0, 1.0])
    assert table.lookup("zzz") is None


def test_cosine_of_unit_vectors():
    table = EmbeddingTable.from_pairs({"a": [2.0, 0.0], "b": [3.0, 3.0]})
    assert table.cosine("a", "b") == pytest.approx(np.sqrt(0.5))
