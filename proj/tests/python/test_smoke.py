import os
import random

import pytest

import ehrenc

FIXTURES = os.environ.get("EHRENC_FIXTURE_DIR", os.path.join(os.path.dirname(__file__), "..", "fixtures"))


def test_version():
    assert ehrenc.__version__.count(".") == 2


def test_generate_and_audit(tmp_path):
    out = tmp_path / "corpus"
    patients, events = ehrenc.generate_corpus(str(out), {"n_patients": 8, "seed": 4})
    assert patients == 8
    assert ehrenc.corpus_counts(str(out)) == (patients, events)
    report = ehrenc.audit(str(out), str(out))
    assert report["rce"] == report["rue"] == report["rcs"] == 1.0


def test_unknown_config_key_raises(tmp_path):
    with pytest.raises(ValueError):
        ehrenc.generate_corpus(str(tmp_path), {"patients": 3})


def test_fixture_counts():
    assert ehrenc.corpus_counts(os.path.join(FIXTURES, "two_table")) == (2, 8)


def test_vocabulary_roundtrip():
    v = ehrenc.Vocabulary.build(["normal saline", "normal saline", "heparin"], min_count=1)
    assert v.tokenize_units("normal") == ["normal"]
    assert ehrenc.Vocabulary.from_text(v.to_text()).to_text() == v.to_text()


def test_digit_places():
    # 12.5: tens, units, point, tenths.
    assert ehrenc.digit_places("12.5") == [4, 2, 1, 3]
    assert ehrenc.timegap_bucket(0) == 0
    assert ehrenc.timegap_bucket(60) == 1


def test_cnn_plan_and_cost():
    plan = ehrenc.cnn_plan((8192, 256), (64, 8))
    assert [op["kind"] for op in plan["ops"]] == ["Lnd", "Lnd", "Lnd", "Lnd", "Ln", "Lnd", "Ln"]
    assert plan["trace"][-1]["shape"] == "(64,8)"
    assert ehrenc.analyze(plan) == (plan["cost"]["params"], plan["cost"]["flops"])
    decoder = ehrenc.mirror_decoder(plan)
    assert decoder["output"] == [8192, 256]


def test_transformer_plan():
    plan = ehrenc.transformer_plan((8192, 256), (64, 8))
    assert [step["shape"] for step in plan["trace"][1:]] == ["(8192,64)", "(8192,32)", "(8192,16)", "(8192,8)", "(64,8)"]


def test_grid_and_compression():
    grid = ehrenc.search_grid(256, 4096)
    assert len(grid) == 25
    assert ehrenc.compression_rate("hierarchical", 2048) == 4096
    assert ehrenc.compression_rate("flattened", 2048) == 1024


def test_quantize_ties_to_lowest_index():
    idx, dist = ehrenc.quantize([[0.5, 0.5] * 4], [[0.0, 0.0], [1.0, 1.0]])
    assert idx == [0, 0, 0, 0]
    assert dist == pytest.approx(2.0)
    with pytest.raises(ValueError):
        ehrenc.quantize([[1.0, 2.0, 3.0]], [[0.0]])


def test_privacy_and_metrics():
    rng = random.Random(1)
    train = [[rng.randrange(10, 20) for _ in range(16)] for _ in range(30)]
    held = [[rng.randrange(10, 20) for _ in range(16)] for _ in range(30)]
    syn = [[rng.randrange(100, 200) for _ in range(16)] for _ in range(5)]
    report = ehrenc.membership_attack(train, held, syn, n_r=12, thresholds=[1.0], seed=1)
    assert report["results"][0]["recall"] == 1.0
    assert report["results"][0]["precision"] == 0.5
    assert ehrenc.hamming([1, 2, 3, 4], [1, 9, 3, 4]) == 0.25
    assert ehrenc.auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert ehrenc.token_accuracy([5, 6, 0], [5, 7, 0]) == 0.5
    assert ehrenc.token_accuracy([0, 0], [0, 0]) is None
