"""Shared test plumbing: a mock chat runtime and a live service wrapper."""

from __future__ import annotations

import base64
import io
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import uvicorn

GOLDEN_REPLY = """Step 1: Immediate action
- Action: Stand up and stretch for two minutes.
- Explanation: A short physical reset interrupts the stall loop.

Step 2: Short-term strategy
- Action: Split the work into three small pieces and start with the smallest.
- Explanation: Smaller scopes rebuild momentum and reduce rework risk.

Step 3: Longer-term reminder
- Action: Keep a note of where work stalls and review it weekly.
- Explanation: Patterns across stalls show what preparation is missing."""


class MockLlmServer:
    """Ollama-shaped chat endpoint with scriptable failure modes.

    behavior: "ok" | "http500" | "empty" (200, empty body) |
    "no_content" (200, JSON without message content)
    """

    def __init__(self, reply: str = GOLDEN_REPLY, delay_ms: float = 0.0):
        self.reply = reply
        self.delay_ms = delay_ms
        self.behavior = "ok"
        self.requests = 0
        mock = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_GET(self):
                self.send_response(200)
                self.end_headers()
                self.wfile.write(b"runtime up")

            def do_POST(self):
                mock.requests += 1
                if mock.delay_ms:
                    time.sleep(mock.delay_ms / 1000.0)
                length = int(self.headers.get("Content-Length", 0))
                self.rfile.read(length)
                if mock.behavior == "http500":
                    self.send_response(500)
                    self.end_headers()
                    return
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.end_headers()
                if mock.behavior == "empty":
                    return
                if mock.behavior == "no_content":
                    self.wfile.write(json.dumps({"message": {}}).encode())
                    return
                body = {"message": {"role": "assistant", "content": mock.reply}}
                self.wfile.write(json.dumps(body).encode())

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()


class LiveServer:
    """uvicorn on an ephemeral loopback port, in a daemon thread."""

    def __init__(self, app):
        config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
        self.server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self.server.run, daemon=True)
        self._thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("service did not start in time")
            time.sleep(0.01)
        sock = self.server.servers[0].sockets[0]
        self.port = sock.getsockname()[1]
        self.base_url = f"http://127.0.0.1:{self.port}"

    def stop(self):
        self.server.should_exit = True
        self._thread.join(timeout=5)


def png_base64(width: int = 64, height: int = 48, color=(200, 40, 90)) -> str:
    from PIL import Image

    img = Image.new("RGB", (width, height), color)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def dead_port_url() -> str:
    """URL with a loopback port that nothing listens on."""
    import socket

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    return f"http://127.0.0.1:{port}"
