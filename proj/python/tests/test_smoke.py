import json
import math

import pytest

import pertcrf


@pytest.fixture(scope="module")
def corpus():
    return pertcrf.synthesize("basic", sentences=400, seed=3)


def test_corpus_round_trip(corpus):
    again = pertcrf.Corpus.parse(corpus.to_text())
    assert again == corpus
    assert len(again) == 400
    first = corpus.sentences()[0]
    assert all(len(tok) == 3 for tok in first)
    assert pertcrf.Corpus(corpus.sentences()) == corpus


def test_parse_error_is_value_error():
    with pytest.raises(pertcrf.DataError, match="line 2"):
        pertcrf.Corpus.parse("a\tN\t0\nb\tN\t7\n")
    with pytest.raises(ValueError):
        pertcrf.Corpus.parse("a\tN\n")


def test_split_sizes(corpus):
    train, valid, test = pertcrf.split(corpus)
    assert (len(train), len(valid), len(test)) == (320, 40, 40)
    with pytest.raises(pertcrf.UsageError):
        pertcrf.split(corpus, test=0.6, valid=0.5)


def test_shannon_index():
    assert pertcrf.shannon_index({"a": 4}) == 0.0
    assert math.isclose(pertcrf.shannon_index({"a": 1, "b": 1}), math.log(2), abs_tol=1e-12)


def test_train_tag_evaluate(corpus, tmp_path):
    train, valid, test = pertcrf.split(corpus)
    run = pertcrf.train("ezafe", train, valid, test, template="CRF1", max_iter=20)
    model = run["model"]
    assert model.task == "ezafe"
    assert model.template == "CRF1"
    assert sorted(model.labels) == ["0", "1"]
    report = json.loads(run["report_json"])
    assert "sections" in report

    path = tmp_path / "ez.crf"
    model.save(str(path))
    loaded = pertcrf.Model.load(str(path))
    assert loaded == model
    assert loaded.dumps() == model.dumps()

    words = test.words()
    tags = loaded.predict(words)
    assert [len(t) for t in tags] == [len(w) for w in words]
    text, js = loaded.evaluate(test)
    assert "ezafe" in text
    json.loads(js)


def test_pos_with_gold_ezafe_and_pipeline(corpus):
    train, valid, _ = pertcrf.split(corpus)
    ez = pertcrf.train("ezafe", train, valid, max_iter=10)["model"]
    pos = pertcrf.train("pos-ez-input", train, valid, ezafe_mode="gold", max_iter=10)["model"]
    assert pos.template == "CRF2+EZ"
    words = valid.words()[:5]
    tagged = pertcrf.pipeline_tag(words, ez, pos)
    assert tagged.words() == words
    with pytest.raises(pertcrf.UsageError):
        pertcrf.train("pos-ez-input", train, ezafe_mode="none")


def test_bayes_decode_shape():
    c = pertcrf.synthesize("homograph", sentences=3, seed=1)
    for words in c.words():
        assert len(pertcrf.bayes_decode("homograph", words)) == len(words)
    with pytest.raises(pertcrf.UsageError):
        pertcrf.synthesize("nope")
