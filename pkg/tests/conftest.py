import csv
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs

import pytest

from gecscope import METRIC_IDS
from gecscope.metrics import MetricVector

DATA_DIR = Path(__file__).parent / "data"
REFERENCE_DIR = DATA_DIR / "reference_tables"
MULTIGED_DIR = DATA_DIR / "multiged"


@pytest.fixture(scope="session")
def reference_dir() -> Path:
    return REFERENCE_DIR


@pytest.fixture(scope="session")
def multiged_dir() -> Path:
    return MULTIGED_DIR


def load_score_table(path: Path) -> dict[str, MetricVector]:
    """Read a model-per-row metric CSV into metric vectors."""
    vectors: dict[str, MetricVector] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            vector = MetricVector()
            for metric in METRIC_IDS:
                if row.get(metric):
                    vector.set(metric, float(row[metric]))
                    vector.coverage[metric] = 1.0
            vectors[row["model"]] = vector
    return vectors


def load_per_language_tables() -> dict[str, dict[str, MetricVector]]:
    return {
        lang: load_score_table(REFERENCE_DIR / f"scores_{lang}.csv")
        for lang in ("en", "de", "it", "sv")
    }


# --- mock services ------------------------------------------------------------

# The mock checker flags every occurrence of these substrings as one match.
CHECKER_ERROR_MARKERS = ("teh", "grammer", "verry")


class _CheckerHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        if self.path != "/v2/check":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", "0"))
        form = parse_qs(self.rfile.read(length).decode("utf-8"))
        if self.server.fail_all:  # type: ignore[attr-defined]
            self.send_error(500, "checker down")
            return
        text = form.get("text", [""])[0]
        matches = []
        lowered = text.lower()
        for marker in CHECKER_ERROR_MARKERS:
            start = 0
            while (pos := lowered.find(marker, start)) != -1:
                matches.append(
                    {
                        "offset": pos,
                        "length": len(marker),
                        "message": f"flagged {marker}",
                        "rule": {"id": f"MOCK_{marker.upper()}"},
                    }
                )
                start = pos + 1
        body = json.dumps(
            {"software": {"name": "mock-checker", "version": "1.0-test"}, "matches": matches}
        ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


def _text_language_probability(text: str, language: str) -> float:
    """Deterministic pseudo-LID: explicit lang= markers rule, 0.9 default."""
    if not text:
        return 0.0
    if f"lang={language}" in text:
        return 0.99
    if "lang=" in text:
        return 0.01
    return 0.9


def _pair_similarity(reference: str, candidate: str) -> float:
    import difflib

    return difflib.SequenceMatcher(None, reference, candidate).ratio()


class _ScorerHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        payload = json.loads(self.rfile.read(length).decode("utf-8"))
        if self.path == "/score":
            pairs = payload["pairs"]
            self.server.batch_sizes.append(len(pairs))  # type: ignore[attr-defined]
            metric = payload["metric"]
            scores = []
            for pair in pairs:
                ratio = _pair_similarity(pair["reference"], pair["candidate"])
                if metric == "bertscore":
                    scores.append(ratio)
                elif metric == "sbert":
                    scores.append(2.0 * ratio - 1.0)
                elif metric == "bleurt":
                    scores.append(0.95 * ratio)
                else:
                    self.send_error(400, f"unknown metric {metric}")
                    return
            body = json.dumps({"scores": scores}).encode("utf-8")
        elif self.path == "/lid":
            probabilities = [
                {lang: _text_language_probability(text, lang) for lang in payload["languages"]}
                for text in payload["texts"]
            ]
            body = json.dumps({"probabilities": probabilities}).encode("utf-8")
        else:
            self.send_error(404)
            return
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path != "/health":
            self.send_error(404)
            return
        body = json.dumps(
            {"status": "ready", "model_versions": {"bertscore": "mock", "sbert": "mock",
                                                   "bleurt": "mock", "lid": "mock"}}
        ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


class _ChatHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        payload = json.loads(self.rfile.read(length).decode("utf-8"))
        self.server.requests.append(payload)  # type: ignore[attr-defined]
        remaining = getattr(self.server, "failures_remaining", 0)
        if remaining > 0:
            self.server.failures_remaining = remaining - 1  # type: ignore[attr-defined]
            self.send_error(503, "flaky")
            return
        sentence = payload["messages"][-1]["content"].split("\n", 1)[-1]
        model = payload.get("model", "")
        if model == "empty":
            content = ""
        elif model == "fixer":
            content = sentence.replace("teh", "the")
        else:  # echo
            content = sentence
        body = json.dumps({"choices": [{"message": {"role": "assistant", "content": content}}]}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


def _start(handler) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


@pytest.fixture(scope="session")
def checker_server():
    server = _start(_CheckerHandler)
    server.fail_all = False
    yield server
    server.shutdown()


@pytest.fixture(scope="session")
def checker_url(checker_server) -> str:
    return f"http://127.0.0.1:{checker_server.server_address[1]}"


@pytest.fixture(scope="session")
def scorer_server():
    server = _start(_ScorerHandler)
    server.batch_sizes = []
    yield server
    server.shutdown()


@pytest.fixture(scope="session")
def scorer_url(scorer_server) -> str:
    return f"http://127.0.0.1:{scorer_server.server_address[1]}"


@pytest.fixture()
def chat_server():
    server = _start(_ChatHandler)
    server.requests = []
    server.failures_remaining = 0
    yield server
    server.shutdown()


@pytest.fixture()
def chat_url(chat_server) -> str:
    return f"http://127.0.0.1:{chat_server.server_address[1]}/v1/chat/completions"
