from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import GOLDEN_REPLY, MockLlmServer  # noqa: E402

from mindmirror.domain import EmotionLabel
from mindmirror.emotion import StubClassifier
from mindmirror.store import SessionStore


@pytest.fixture
def store(tmp_path) -> SessionStore:
    return SessionStore(tmp_path / "records", tmp_path / "tmp")


@pytest.fixture
def stub_backend() -> StubClassifier:
    scores = {label: (0.9 if label is EmotionLabel.HAPPY else 0.1 / 6) for label in EmotionLabel}
    return StubClassifier(default_scores=scores, model_id="stub-happy")


@pytest.fixture(scope="session")
def mock_llm():
    server = MockLlmServer(reply=GOLDEN_REPLY)
    yield server
    server.stop()


@pytest.fixture
def llm_ok(mock_llm):
    mock_llm.behavior = "ok"
    mock_llm.reply = GOLDEN_REPLY
    mock_llm.delay_ms = 0.0
    return mock_llm
