#!/usr/bin/env python3
"""Launch the full service with stub engines and probe it.

Starts the HTTP service on an ephemeral loopback port (stub classifier,
stub chat runtime, stub speech adapters with realistic stage delays), then
runs the reliability suite against it and prints the success table plus
the voice-stage latency breakdown.
"""

import tempfile
import threading
import time
from pathlib import Path

import uvicorn

from mindmirror.emotion import StubClassifier
from mindmirror.llm import StubChatClient
from mindmirror.probe import (
    ProbeSpec,
    format_reliability_table,
    format_voice_latency_table,
    run_reliability_suite,
)
from mindmirror.service import AppComponents, create_app
from mindmirror.store import SessionStore
from mindmirror.voice import DelayedConverter, StubStt, StubTts

CANNED = """Step 1: Immediate action
- Action: Breathe out slowly and name the single blocking question.
- Explanation: Naming the question turns a fog into a task.

Step 2: Short-term strategy
- Action: Ask one colleague to rubber-duck the question for ten minutes.
- Explanation: Saying it aloud usually surfaces the missing piece.

Step 3: Longer-term reminder
- Action: Keep a running list of questions you could not phrase quickly.
- Explanation: The list shows where your mental model needs work."""


def main() -> None:
    with tempfile.TemporaryDirectory() as scratch:
        components = AppComponents(
            store=SessionStore(Path(scratch) / "records"),
            backend=StubClassifier(model_id="demo"),
            # stage delays modeled after a realistic local voice round trip
            llm_client=StubChatClient(reply=CANNED, delay_ms=90),
            stt=StubStt(default="feeling scattered, three tabs of docs open", delay_ms=40),
            tts=StubTts(delay_ms=30),
            converter=DelayedConverter(5),
        )
        config = uvicorn.Config(create_app(components), host="127.0.0.1", port=0,
                               log_level="warning")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        while not server.started:
            time.sleep(0.01)
        port = server.servers[0].sockets[0].getsockname()[1]
        base_url = f"http://127.0.0.1:{port}"
        print(f"service up at {base_url}\n")

        plan = [
            ProbeSpec("health", 10),
            ProbeSpec("emotion", 10),
            ProbeSpec("voice", 5),
            ProbeSpec("session_save", 10),
            ProbeSpec("cleanup", 10),
        ]
        report = run_reliability_suite(base_url, plan)
        print(format_reliability_table(report))
        print()
        print(format_voice_latency_table(report.voice_traces))

        server.should_exit = True
        thread.join(timeout=5)


if __name__ == "__main__":
    main()
