import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def synthetic_corpus_path() -> Path:
    return REPO_ROOT / "corpora" / "synthetic_20.jsonl"


@pytest.fixture(scope="session")
def synthetic_script_path() -> Path:
    return REPO_ROOT / "corpora" / "synthetic_20_script.json"


class StubHTTPServer:
    """Scriptable local HTTP server: pops one (status, body) per request."""

    def __init__(self):
        self.responses: list[tuple[int, dict]] = []
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with stub._lock:
                    stub.requests.append(body)
                    if stub.responses:
                        status, payload = stub.responses.pop(0)
                    else:
                        status, payload = 500, {"error": "script exhausted"}
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self._server = HTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/"

    def script(self, *responses: tuple[int, dict]) -> None:
        with self._lock:
            self.responses = list(responses)
            self.requests = []

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_server():
    server = StubHTTPServer()
    yield server
    server.close()


def chat_payload(text: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}
