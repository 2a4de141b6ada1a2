import math

import pytest

import safechat

REF = "2019-07-06"


def test_preprocess_modes():
    assert safechat.preprocess("I can't  believe it!!") == safechat.preprocess("I can't  believe it!!")
    out = safechat.preprocess("He DIDN'T stop")
    assert out == out.lower()
    ner = safechat.preprocess("He didn't stop in Maastricht", mode="ner")
    assert "Maastricht" in ner
    with pytest.raises(ValueError):
        safechat.preprocess("x", mode="shout")


def test_tfidf_rows_are_unit_length():
    vocab, rows = safechat.tfidf(["a b c", "a b", "b c d"], ngram_max=2, min_df=1)
    assert vocab == sorted(vocab)
    assert "a b" in vocab
    for row in rows:
        assert len(row) == len(vocab)
        assert math.isclose(math.sqrt(sum(x * x for x in row)), 1.0, rel_tol=1e-12)


def test_extract_slots():
    x = safechat.extract("Yesterday at 10pm a man grabbed me in Maastricht", ref_date=REF)
    assert x["location"]["value"] == "Maastricht"
    assert x["date"]["value"] == "2019-07-05"
    assert x["time"]["value"] == "22:00"
    assert safechat.extract("nothing here", ref_date=REF)["location"] is None
    with pytest.raises(ValueError):
        safechat.extract("x", ref_date="July")


@pytest.fixture(scope="module")
def model():
    reports, negatives = safechat.generate_corpus(n_docs=400, seed=3)
    assert len(reports) == 200 and len(negatives) == 200
    m, metrics = safechat.train(reports, negatives, seed=1)
    assert set(metrics) == {"HARASSMENT_OR_NOT", "VERBAL", "NON_VERBAL", "PHYSICAL"}
    return m


def test_model_predicts_and_round_trips(model, tmp_path):
    p = model.predict("A man grabbed me and touched me on the bus")
    assert set(p) == {"harassment", "types", "probabilities"}
    assert all(0.0 <= v <= 1.0 for v in p["probabilities"].values())
    path = tmp_path / "m.mtmb"
    model.save(path)
    again = safechat.Model.load(path)
    assert again.predict("A man grabbed me") == model.predict("A man grabbed me")
    with pytest.raises(safechat.SafechatError):
        safechat.Model.load(tmp_path / "missing.mtmb")


def test_chat_reaches_the_end(model):
    chat = safechat.Chat(model, ref_date=REF)
    assert chat.state == "AWAIT_INCIDENT"
    assert chat.greeting()
    for _ in range(60):
        if chat.ended:
            break
        chat.send("I do not know")
    assert chat.ended
    assert not chat.consented
    assert chat.report() is None


def test_validate_ner_small_run():
    r = safechat.validate_ner(n=2, seed=42, ref_date=REF)
    for kind in ("LOCATION", "DATE", "TIME"):
        assert 0.0 <= r[kind]["accuracy"] <= 1.0
        assert r[kind]["total"] <= 2 * 5
