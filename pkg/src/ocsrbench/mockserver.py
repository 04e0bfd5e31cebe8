"""
Bundled mock chat-completion endpoint.

Serves canned responses keyed by the SHA-256 of the *target* (last) image in
each request, so a run is deterministic regardless of request arrival order.
Used by the end-to-end tests and the demo script; also handy for wiring up a
new deployment without spending API credits.
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional


def image_key(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class MockStats:
    requests: int = 0
    max_in_flight: int = 0
    _in_flight: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def enter(self) -> None:
        with self._lock:
            self.requests += 1
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)

    def leave(self) -> None:
        with self._lock:
            self._in_flight -= 1


class MockChatEndpoint:
    """A canned OpenAI-compatible endpoint running on localhost.

    ``responses`` maps image SHA-256 hex digests (see :func:`image_key`) to
    the text the "model" should answer. ``status_script`` is a queue of HTTP
    statuses to serve before behaving normally (e.g. ``[429, 429]`` to test
    retry behavior). ``delay_s`` slows each request down, which makes
    concurrency observable in tests.
    """

    def __init__(
        self,
        responses: dict[str, str],
        default_response: Optional[str] = None,
        status_script: Optional[list[int]] = None,
        delay_s: float = 0.0,
    ):
        self.responses = dict(responses)
        self.default_response = default_response
        self.status_script = list(status_script or [])
        self.delay_s = delay_s
        self.stats = MockStats()
        self._script_lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output quiet
                pass

            def do_POST(self):
                outer.stats.enter()
                try:
                    if outer.delay_s:
                        time.sleep(outer.delay_s)
                    scripted = None
                    with outer._script_lock:
                        if outer.status_script:
                            scripted = outer.status_script.pop(0)
                    if scripted is not None and scripted != 200:
                        self.send_response(scripted)
                        self.end_headers()
                        self.wfile.write(b'{"error": "scripted failure"}')
                        return
                    length = int(self.headers.get("Content-Length", "0"))
                    body = json.loads(self.rfile.read(length))
                    text = outer._answer_for(body)
                    if text is None:
                        self.send_response(404)
                        self.end_headers()
                        self.wfile.write(b'{"error": "no canned response"}')
                        return
                    payload = {
                        "choices": [{"message": {"role": "assistant", "content": text}}]
                    }
                    data = json.dumps(payload).encode("utf-8")
                    self.send_response(200)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(data)))
                    self.end_headers()
                    self.wfile.write(data)
                finally:
                    outer.stats.leave()

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def _answer_for(self, body: dict) -> Optional[str]:
        digest = None
        for message in body.get("messages", []):
            content = message.get("content")
            if not isinstance(content, list):
                continue
            for part in content:
                if part.get("type") != "image_url":
                    continue
                url = part.get("image_url", {}).get("url", "")
                if "," in url:
                    raw = base64.b64decode(url.split(",", 1)[1])
                    digest = hashlib.sha256(raw).hexdigest()  # last image wins
        if digest and digest in self.responses:
            return self.responses[digest]
        return self.default_response

    # -- lifecycle -----------------------------------------------------------

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/v1"

    def start(self) -> "MockChatEndpoint":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "MockChatEndpoint":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
