"""Prompt assembly, local LLM chat client, and three-step reply parsing.

The prompt is built from six named input slots plus fixed rule lines and a
fixed three-step output format; the template text is configuration data,
shipped in English by default. The client speaks the Ollama-style
``/api/chat`` JSON protocol against a configurable local runtime. When the
runtime is down the caller gets a canned supportive fallback instead of an
HTTP error, and replies that do not match the three-step shape are kept as
raw text rather than discarded.
"""

from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass
from typing import Optional

import requests

from .domain import PromptFields, StepKind, SuggestionStep, ThreeStepSuggestion


class LlmError(Exception):
    pass


class FallbackUnavailable(LlmError):
    """Runtime unreachable after retries; carries the canned offline message."""

    def __init__(self, fallback_message: str):
        super().__init__("LLM runtime unavailable")
        self.fallback_message = fallback_message


class MalformedRuntimeReply(LlmError):
    """Runtime answered 200 but the body was not a usable chat reply."""


class StructureMismatch(LlmError):
    """Reply text does not contain exactly the three expected steps."""


SAFETY_STATEMENT = (
    "This system provides general emotional support and productivity-oriented "
    "suggestions, but it cannot replace professional psychological counseling "
    "or medical services. If you experience persistent or severe distress, "
    "please seek professional help."
)

FALLBACK_MESSAGE = (
    "The local assistant is offline right now, so there is no generated "
    "suggestion this time. Your reflection was saved. Consider taking a short "
    "break, writing down the one next step that feels smallest, and trying "
    "again in a few minutes. "
    + SAFETY_STATEMENT
)

EMPTY_SLOT = "(none)"

STEP_TITLES = {1: "Immediate action", 2: "Short-term strategy", 3: "Longer-term reminder"}
STEP_KINDS = {1: StepKind.IMMEDIATE, 2: StepKind.SHORT_TERM, 3: StepKind.LONGER_TERM}


@dataclass(frozen=True)
class PromptTemplate:
    """Configured template text: system line, rule lines, output format."""

    system_instruction: str
    rules: tuple[str, ...]
    output_format: str


DEFAULT_TEMPLATE = PromptTemplate(
    system_instruction=(
        "You are a friendly and professional digital companion for work-related state reflection.\n"
        "Your task is to help the user understand the current blockage and generate a structured three-step suggestion."
    ),
    rules=(
        "1. Base the response on the user's confirmed state and reflection content.",
        "2. Provide specific and actionable suggestions.",
        "3. Use warm and supportive language.",
        "4. Do not diagnose mental disorders.",
        "5. Do not provide medical or therapeutic treatment.",
        "6. If the user expresses severe or persistent distress, recommend professional help.",
    ),
    output_format=(
        "Step 1: Immediate action\n"
        "- Action: <one concrete action>\n"
        "- Explanation: <short explanation>\n"
        "\n"
        "Step 2: Short-term strategy\n"
        "- Action: <one short-term work strategy>\n"
        "- Explanation: <short explanation>\n"
        "\n"
        "Step 3: Longer-term reminder\n"
        "- Action: <one reflection or planning habit>\n"
        "- Explanation: <short explanation>"
    ),
)


@dataclass(frozen=True)
class PromptText:
    system_instruction: str
    filled_template: str
    assembled: str


def _slot(value: str) -> str:
    # Field text is included verbatim; only empty slots get the placeholder.
    return value if value.strip() else EMPTY_SLOT


def build_prompt(fields: PromptFields, template: PromptTemplate = DEFAULT_TEMPLATE) -> PromptText:
    """Assemble the full prompt. Pure: identical fields give identical bytes."""
    field_lines = "\n".join(
        [
            "Input fields:",
            f"- detected_emotion: {_slot(fields.detected_emotion)}",
            f"- user_confirmed_state: {_slot(fields.user_confirmed_state)}",
            f"- reflection_blockage: {_slot(fields.reflection_blockage)}",
            f"- reflection_tried: {_slot(fields.reflection_tried)}",
            f"- reflection_goal: {_slot(fields.reflection_goal)}",
            f"- session_context: {_slot(fields.session_context)}",
        ]
    )
    filled = (
        field_lines
        + "\n\nRules:\n"
        + "\n".join(template.rules)
        + "\n\nOutput format:\n"
        + template.output_format
    )
    return PromptText(
        system_instruction=template.system_instruction,
        filled_template=filled,
        assembled=template.system_instruction + "\n\n" + filled,
    )


def voice_system_text(template: PromptTemplate = DEFAULT_TEMPLATE) -> str:
    """System text for free-form voice chat: same persona and safety rules,
    but no three-question slots and no fixed output format."""
    return template.system_instruction + "\n\nRules:\n" + "\n".join(template.rules)


@dataclass(frozen=True)
class LlmClientConfig:
    """Where and how to reach the local chat runtime."""

    endpoint_url: str = "http://127.0.0.1:11434"
    model_name: str = "qwen:7b"
    request_timeout: float = 30.0
    max_retries: int = 1

    def __post_init__(self):
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_env(cls, env: Optional[dict] = None) -> "LlmClientConfig":
        env = os.environ if env is None else env
        return cls(
            endpoint_url=env.get("MINDMIRROR_LLM_URL", cls.endpoint_url),
            model_name=env.get("MINDMIRROR_LLM_MODEL", cls.model_name),
            request_timeout=float(env.get("MINDMIRROR_LLM_TIMEOUT", cls.request_timeout)),
            max_retries=int(env.get("MINDMIRROR_LLM_RETRIES", cls.max_retries)),
        )


class OllamaChatClient:
    """Blocking client for an Ollama-compatible ``/api/chat`` endpoint.

    Safe for concurrent use: every call is an independent idempotent
    request; retries never duplicate side effects.
    """

    def __init__(self, config: LlmClientConfig):
        self.config = config

    def chat(self, system_text: str, user_text: str) -> str:
        payload = {
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": system_text},
                {"role": "user", "content": user_text},
            ],
            "stream": False,
        }
        url = self.config.endpoint_url.rstrip("/") + "/api/chat"
        attempts = self.config.max_retries + 1
        for attempt in range(attempts):
            try:
                response = requests.post(url, json=payload, timeout=self.config.request_timeout)
            except (requests.ConnectionError, requests.Timeout):
                continue
            if response.status_code != 200:
                continue
            try:
                body = response.json()
                content = body["message"]["content"]
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedRuntimeReply(f"unparsable runtime reply: {exc}") from exc
            if not isinstance(content, str) or not content.strip():
                raise MalformedRuntimeReply("runtime reply carried no text content")
            return content
        raise FallbackUnavailable(FALLBACK_MESSAGE)

    def reachable(self, probe_timeout: float = 1.0) -> bool:
        try:
            response = requests.get(self.config.endpoint_url, timeout=probe_timeout)
        except requests.RequestException:
            return False
        return response.status_code == 200


class StubChatClient:
    """Deterministic chat client for tests and probe harnesses.

    Optionally sleeps ``delay_ms`` per call (latency-stage injection) and
    can simulate a dead runtime.
    """

    def __init__(self, reply: str, delay_ms: float = 0.0, fail: bool = False):
        self.reply = reply
        self.delay_ms = delay_ms
        self.fail = fail
        self.calls = 0

    def chat(self, system_text: str, user_text: str) -> str:
        self.calls += 1
        if self.delay_ms:
            time.sleep(self.delay_ms / 1000.0)
        if self.fail:
            raise FallbackUnavailable(FALLBACK_MESSAGE)
        return self.reply

    def reachable(self, probe_timeout: float = 1.0) -> bool:
        return not self.fail


def generate_suggestion(prompt: PromptText, config: LlmClientConfig) -> str:
    """Raw model reply for an assembled prompt; see OllamaChatClient for errors."""
    return OllamaChatClient(config).chat(prompt.system_instruction, prompt.filled_template)


_STEP_RE = re.compile(r"^\s*(?:[#*>\-]+\s*)?step\s*(\d+)\s*[:.\-]", re.IGNORECASE)
_ACTION_RE = re.compile(r"^\s*(?:[*\-•]+\s*)?action\s*:\s*(.*)$", re.IGNORECASE)
_EXPLANATION_RE = re.compile(r"^\s*(?:[*\-•]+\s*)?explanation\s*:\s*(.*)$", re.IGNORECASE)


def parse_three_steps(reply: str) -> ThreeStepSuggestion:
    """Extract the three steps from a reply in the fixed output format.

    Line-oriented and case-insensitive on headings; prose before "Step 1"
    is ignored (it survives in raw_text). Continuation lines are folded
    into the field above them with single spaces. Anything other than
    exactly steps 1..3, each with a non-empty Action and Explanation,
    raises StructureMismatch.
    """
    steps: dict[int, dict[str, list[str]]] = {}
    current_step: Optional[int] = None
    current_field: Optional[str] = None

    for line in reply.splitlines():
        heading = _STEP_RE.match(line)
        if heading:
            number = int(heading.group(1))
            if number in steps:
                raise StructureMismatch(f"duplicate heading for step {number}")
            steps[number] = {"action": [], "explanation": []}
            current_step = number
            current_field = None
            continue
        if current_step is None:
            continue  # leading prose
        action = _ACTION_RE.match(line)
        if action:
            steps[current_step]["action"].append(action.group(1).strip())
            current_field = "action"
            continue
        explanation = _EXPLANATION_RE.match(line)
        if explanation:
            steps[current_step]["explanation"].append(explanation.group(1).strip())
            current_field = "explanation"
            continue
        if current_field is not None and line.strip():
            steps[current_step][current_field].append(line.strip())

    if sorted(steps) != [1, 2, 3]:
        raise StructureMismatch(f"expected steps 1, 2, 3; found {sorted(steps) or 'none'}")

    parsed = []
    for number in (1, 2, 3):
        action_text = " ".join(part for part in steps[number]["action"] if part).strip()
        explanation_text = " ".join(part for part in steps[number]["explanation"] if part).strip()
        if not action_text or not explanation_text:
            raise StructureMismatch(f"step {number} is missing its Action or Explanation line")
        parsed.append(SuggestionStep(kind=STEP_KINDS[number], action=action_text,
                                     explanation=explanation_text))
    return ThreeStepSuggestion(steps=tuple(parsed), raw_text=reply)


def render_three_steps(suggestion: ThreeStepSuggestion) -> str:
    """Canonical text form of a suggestion; parse_three_steps inverts it."""
    blocks = []
    for number, step in enumerate(suggestion.steps, start=1):
        blocks.append(
            f"Step {number}: {STEP_TITLES[number]}\n"
            f"- Action: {step.action}\n"
            f"- Explanation: {step.explanation}"
        )
    return "\n\n".join(blocks)
