"""Wire-contract tests for the scorer sidecar."""

import pytest
from fastapi.testclient import TestClient

from scorer_service.app import create_app
from scorer_service.backends import LiteBackend

# Five pinned sentences per language, disjoint from the profile seed text.
LID_FIXTURES = {
    "en": [
        "My brother has never been to the mountains in winter before.",
        "Please close the door quietly when you leave the house tonight.",
        "We found a small restaurant near the harbour and stayed for hours.",
        "The teacher asked everyone to write a short story about their family.",
        "After the rain stopped, the streets were full of people again.",
    ],
    "de": [
        "Mein Bruder war im Winter noch nie in den Bergen gewesen.",
        "Bitte schließe die Tür leise, wenn du heute Abend das Haus verlässt.",
        "Wir fanden ein kleines Restaurant am Hafen und blieben stundenlang dort.",
        "Die Lehrerin bat alle, eine kurze Geschichte über ihre Familie zu schreiben.",
        "Nachdem der Regen aufgehört hatte, waren die Straßen wieder voller Menschen.",
    ],
    "it": [
        "Mio fratello non era mai stato in montagna d'inverno prima d'ora.",
        "Per favore chiudi piano la porta quando esci di casa stasera.",
        "Abbiamo trovato un piccolo ristorante vicino al porto e siamo rimasti per ore.",
        "La maestra ha chiesto a tutti di scrivere una breve storia sulla propria famiglia.",
        "Dopo che la pioggia è finita, le strade si sono riempite di nuovo di gente.",
    ],
    "sv": [
        "Min bror hade aldrig varit i bergen på vintern förut.",
        "Stäng dörren tyst när du lämnar huset i kväll, är du snäll.",
        "Vi hittade en liten restaurang nära hamnen och stannade i flera timmar.",
        "Läraren bad alla att skriva en kort berättelse om sin familj.",
        "När regnet hade slutat var gatorna fulla av människor igen.",
    ],
}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def score(client, metric, pairs):
    response = client.post(
        "/score",
        json={"metric": metric, "pairs": [{"reference": r, "candidate": c} for r, c in pairs]},
    )
    assert response.status_code == 200, response.text
    return response.json()["scores"]


# --- [SECONDARY] scorer contract ---------------------------------------------

def test_identical_pair_sbert_self_similarity(client):
    (value,) = score(client, "sbert", [("The same sentence.", "The same sentence.")])
    assert value >= 0.999


def test_identical_pair_bertscore_f1(client):
    (value,) = score(client, "bertscore", [("The same sentence.", "The same sentence.")])
    assert value >= 0.99


def test_batch_order_preserved_on_shuffled_fixtures(client):
    pairs = [
        ("the quick brown fox", "the quick brown fox"),
        ("the quick brown fox", "a completely different sentence here"),
        ("the quick brown fox", "the quick brown dog"),
    ]
    for metric in ("bertscore", "sbert", "bleurt"):
        forward = score(client, metric, pairs)
        shuffled = score(client, metric, [pairs[2], pairs[0], pairs[1]])
        assert forward[0] > forward[2] > forward[1], metric
        assert shuffled == [forward[2], forward[0], forward[1]], metric


def test_lid_pinned_fixtures_above_point_nine(client):
    texts = [text for fixtures in LID_FIXTURES.values() for text in fixtures]
    expected = [lang for lang, fixtures in LID_FIXTURES.items() for _ in fixtures]
    response = client.post("/lid", json={"texts": texts, "languages": ["en", "de", "it", "sv"]})
    assert response.status_code == 200
    probabilities = response.json()["probabilities"]
    assert len(probabilities) == 20
    for text, language, probability_map in zip(texts, expected, probabilities):
        assert probability_map[language] > 0.9, (language, text, probability_map)


def test_repeated_identical_requests_return_identical_bytes(client):
    body = {"metric": "bleurt",
            "pairs": [{"reference": "några ord på svenska", "candidate": "some english words"}]}
    first = client.post("/score", json=body)
    second = client.post("/score", json=body)
    assert first.content == second.content
    lid_body = {"texts": ["Guten Morgen allerseits."], "languages": ["de", "en"]}
    assert client.post("/lid", json=lid_body).content == client.post("/lid", json=lid_body).content


# --- wire format and error handling ---------------------------------------------

def test_scores_are_order_preserving_per_pair(client):
    pairs = [(f"sentence number {i}", f"sentence number {i}") for i in range(5)]
    assert score(client, "sbert", pairs) == [1.0] * 5


def test_schema_violation_returns_400(client):
    assert client.post("/score", json={"metric": "sbert"}).status_code == 400
    assert client.post("/score", json={"metric": "sbert", "pairs": []}).status_code == 400
    assert client.post("/lid", json={"texts": ["x"]}).status_code == 400
    assert client.post("/score", json={"pairs": [{"reference": 3, "candidate": "x"}]}).status_code == 400


def test_unknown_metric_returns_400(client):
    response = client.post(
        "/score", json={"metric": "rouge", "pairs": [{"reference": "a", "candidate": "b"}]}
    )
    assert response.status_code == 400
    assert "rouge" in response.text


def test_batch_cap_enforced():
    small = TestClient(create_app(batch_cap=4))
    pairs = [{"reference": "a", "candidate": "b"}] * 5
    response = small.post("/score", json={"metric": "sbert", "pairs": pairs})
    assert response.status_code == 400
    assert "cap" in response.text
    assert small.post("/lid", json={"texts": ["x"] * 5, "languages": ["en"]}).status_code == 400


def test_503_while_models_load():
    cold = create_app(warmup=False)
    with TestClient(cold) as client_cold:
        body = {"metric": "sbert", "pairs": [{"reference": "a", "candidate": "a"}]}
        assert client_cold.post("/score", json=body).status_code == 503
        health = client_cold.get("/health").json()
        assert health["status"] == "loading"
        cold.state.load_backend()
        assert client_cold.post("/score", json=body).status_code == 200


def test_health_reports_versions(client):
    payload = client.get("/health").json()
    assert payload["status"] == "ready"
    versions = payload["model_versions"]
    assert versions["backend"] == "lite"
    for key in ("bertscore", "sbert", "bleurt", "lid", "bertscore_rescale_with_baseline"):
        assert key in versions


def test_empty_text_lid_floor(client):
    response = client.post("/lid", json={"texts": ["", "   "], "languages": ["en", "sv"]})
    assert response.json()["probabilities"] == [{"en": 0.0, "sv": 0.0}] * 2


def test_unsupported_language_probability_zero(client):
    response = client.post("/lid", json={"texts": ["bonjour tout le monde"], "languages": ["fr", "en"]})
    (probabilities,) = response.json()["probabilities"]
    assert probabilities["fr"] == 0.0
    assert 0.0 <= probabilities["en"] <= 1.0


def test_sbert_stays_in_cosine_range(client):
    pairs = [("abc def", "zzz qqq"), ("", "x"), ("hello", "hello")]
    for value in score(client, "sbert", pairs):
        assert -1.0 <= value <= 1.0


# --- backend-level determinism ----------------------------------------------------

def test_backend_is_deterministic_across_instances():
    first = LiteBackend()
    first.load()
    second = LiteBackend()
    second.load()
    pairs = [("ein kleiner Satz", "ein kleiner Satz mit mehr")]
    for metric in ("bertscore", "sbert", "bleurt"):
        assert first.score(metric, pairs) == second.score(metric, pairs)
    texts = ["Det här är svenska.", "This is English."]
    assert first.lid(texts, ["en", "sv"]) == second.lid(texts, ["en", "sv"])
