import json

import numpy as np
import pytest

from weblearn.data import (
    Concept,
    Dataset,
    Sample,
    WebLabel,
    infer_binary_labels,
    load_dataset,
    save_dataset,
)
from weblearn.errors import DataError


def _record(i, dim=4, **extra):
    rec = {
        "id": f"s{i}",
        "features": [float(i + j) for j in range(dim)],
        "text": {"title": f"video {i}", "description": "", "tags": ["home"]},
        "asr": ["hello", "world"],
        "ocr": [],
        "image_labels": {"dog": 0.9},
    }
    rec.update(extra)
    return rec


def _write(tmp_path, records, name="data.jsonl"):
    path = tmp_path / name
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return str(path)


def test_load_basic(tmp_path):
    path = _write(tmp_path, [_record(i) for i in range(3)])
    ds = load_dataset(path)
    assert len(ds) == 3
    assert ds.feature_dim == 4
    assert ds.ids == ["s0", "s1", "s2"]
    assert ds.samples[0].web_label.title == "video 0"
    assert ds.samples[0].web_label.asr_tokens == ("hello", "world")


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(DataError, match="empty dataset"):
        load_dataset(str(path))


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps(_record(0)) + "\n{not json\n")
    with pytest.raises(DataError, match="line 2"):
        load_dataset(str(path))


def test_inconsistent_feature_length_names_offender(tmp_path):
    recs = [_record(0), _record(1, dim=3)]
    path = _write(tmp_path, recs)
    with pytest.raises(DataError, match="s1"):
        load_dataset(path)


def test_duplicate_id_rejected(tmp_path):
    recs = [_record(0), _record(0)]
    path = _write(tmp_path, recs)
    with pytest.raises(DataError, match="duplicate"):
        load_dataset(path)


def test_unknown_gold_concept_rejected(tmp_path):
    recs = [_record(0, gt=["dog"]), _record(1, gt=["unicorn"])]
    path = _write(tmp_path, recs)
    concepts = (Concept(id="dog", name_words=("dog",)),)
    with pytest.raises(DataError, match="unicorn"):
        load_dataset(path, concepts=concepts)


def test_missing_modalities_default_empty(tmp_path):
    path = _write(tmp_path, [{"id": "x", "features": [1.0, 2.0]}])
    ds = load_dataset(path)
    wl = ds.samples[0].web_label
    assert wl.title == "" and wl.tags == () and wl.asr_tokens == () and wl.image_labels == {}


def test_feature_file_indirection(tmp_path):
    np.save(tmp_path / "feat.npy", np.array([1.0, 2.0, 3.0]))
    path = _write(tmp_path, [{"id": "x", "feature_file": "feat.npy"}])
    ds = load_dataset(path)
    np.testing.assert_array_equal(ds.samples[0].features, [1.0, 2.0, 3.0])


def test_round_trip(tmp_path):
    recs = [_record(i, gt=["dog"] if i == 0 else []) for i in range(3)]
    path = _write(tmp_path, recs)
    concepts = (Concept(id="dog", name_words=("dog",)),)
    ds = load_dataset(path, concepts=concepts)
    out = str(tmp_path / "copy.jsonl")
    save_dataset(ds, out)
    ds2 = load_dataset(out)
    assert ds2.concepts == ds.concepts  # sidecar written and reloaded
    assert len(ds2) == len(ds)
    for a, b in zip(ds.samples, ds2.samples):
        assert a.id == b.id
        np.testing.assert_array_equal(a.features, b.features)
        assert a.web_label == b.web_label
        assert a.gold_concepts == b.gold_concepts


def test_training_view_strips_gold(tmp_path):
    path = _write(tmp_path, [_record(0, gt=["dog"])])
    ds = load_dataset(path, concepts=(Concept(id="dog", name_words=("dog",)),))
    assert ds.has_gold()
    view = ds.training_view()
    assert not view.has_gold()
    assert all(s.gold_concepts is None for s in view.samples)
    # the original is untouched
    assert ds.samples[0].gold_concepts == {"dog"}


def _tiny_dataset(n=3, dim=2):
    samples = tuple(
        Sample(id=f"s{i}", features=np.zeros(dim), web_label=WebLabel()) for i in range(n)
    )
    return Dataset(samples=samples, feature_dim=dim)


def test_infer_binary_labels_threshold_at_zero():
    ds = _tiny_dataset()
    np.testing.assert_array_equal(infer_binary_labels(ds, "c", [0.7, 0.0, 0.2]), [1, -1, 1])


def test_infer_binary_labels_all_zero():
    ds = _tiny_dataset()
    np.testing.assert_array_equal(infer_binary_labels(ds, "c", [0.0, 0.0, 0.0]), [-1, -1, -1])


def test_infer_binary_labels_length_mismatch():
    ds = _tiny_dataset()
    with pytest.raises(DataError):
        infer_binary_labels(ds, "c", [0.5, 0.5])


def test_positive_count_matches_positive_scores():
    rng = np.random.default_rng(0)
    ds = _tiny_dataset(n=50)
    scores = np.where(rng.random(50) < 0.4, rng.random(50), 0.0)
    labels = infer_binary_labels(ds, "c", scores)
    assert (labels == 1).sum() == (scores > 0).sum()
