import pytest

from gecscope.scorer_client import ScorerClient, ScorerError


@pytest.fixture()
def client(scorer_url):
    return ScorerClient(scorer_url)


def test_identical_pairs_score_high(client):
    scores = client.score("sbert", [("same text", "same text")])
    assert scores[0] >= 0.999
    scores = client.score("bertscore", [("same text", "same text")])
    assert scores[0] >= 0.99


def test_batch_order_preserved(client):
    pairs = [("aaaa", "aaaa"), ("aaaa", "zzzz"), ("aaaa", "aazz")]
    scores = client.score("bertscore", pairs)
    assert len(scores) == 3
    assert scores[0] > scores[2] > scores[1]


def test_large_batches_are_chunked(client, scorer_server):
    scorer_server.batch_sizes.clear()
    pairs = [(f"ref {i}", f"cand {i}") for i in range(130)]
    scores = client.score("bleurt", pairs)
    assert len(scores) == 130
    assert scorer_server.batch_sizes == [64, 64, 2]


def test_lid_probabilities(client):
    maps = client.lid(["some plain text", ""], ["en", "de"])
    assert set(maps[0]) == {"en", "de"}
    assert maps[1] == {"en": 0.0, "de": 0.0}


def test_lid_same_text_identical_maps(client):
    maps = client.lid(["hello there", "hello there"], ["en"])
    assert maps[0] == maps[1]


def test_health_reports_versions(client):
    payload = client.health()
    assert payload["status"] == "ready"
    assert "lid" in payload["model_versions"]


def test_unreachable_scorer_raises():
    client = ScorerClient("http://127.0.0.1:1", timeout=0.2)
    with pytest.raises(ScorerError):
        client.score("sbert", [("a", "b")])
    with pytest.raises(ScorerError):
        client.health()
