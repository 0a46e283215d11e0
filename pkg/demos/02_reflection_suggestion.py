#!/usr/bin/env python3
"""Blockage reflection -> prompt -> bounded three-step suggestion.

Shows the three-question reflection being assembled into the full prompt
(with its safety rules), then the reply being parsed into the fixed
three-step shape. If a local chat runtime is reachable (MINDMIRROR_LLM_URL,
default http://127.0.0.1:11434) the real reply is used; otherwise a canned
reply demonstrates the parser, and the offline fallback message is shown.
"""

from mindmirror.domain import PromptFields
from mindmirror.llm import (
    FallbackUnavailable,
    LlmClientConfig,
    StructureMismatch,
    build_prompt,
    generate_suggestion,
    parse_three_steps,
    render_three_steps,
)

CANNED_REPLY = """Step 1: Immediate action
- Action: Close the extra editor tabs and write the failing case down in one sentence.
- Explanation: Shrinking the visible problem makes the next move obvious.

Step 2: Short-term strategy
- Action: Timebox 25 minutes to reproduce the bug with the smallest input you can.
- Explanation: A minimal reproduction usually exposes the wrong assumption.

Step 3: Longer-term reminder
- Action: Note each time this module blocks you and skim the notes on Fridays.
- Explanation: Recurring blockages point at missing tests or unclear ownership."""


def main() -> None:
    fields = PromptFields(
        detected_emotion="sad",
        user_confirmed_state="sad",
        reflection_blockage="integration test fails only on the second run",
        reflection_tried="re-ran with a clean database, added logging",
        reflection_goal="make the suite reliable before the release cut",
        session_context="",
    )
    prompt = build_prompt(fields)
    print("=== assembled prompt ===")
    print(prompt.assembled)

    config = LlmClientConfig(request_timeout=5.0, max_retries=0)
    try:
        reply = generate_suggestion(prompt, config)
        print("\n=== reply from the local runtime ===")
    except FallbackUnavailable as exc:
        print("\n(local runtime not reachable; the service would answer with:)")
        print(f"  {exc.fallback_message}\n")
        reply = CANNED_REPLY
        print("=== canned reply, to demonstrate parsing ===")
    print(reply)

    try:
        suggestion = parse_three_steps(reply)
    except StructureMismatch as exc:
        print(f"\nreply did not match the three-step shape ({exc}); raw text would be kept")
        return

    print("\n=== parsed steps ===")
    for step in suggestion.steps:
        print(f"[{step.kind.value}] {step.action}")
        print(f"    {step.explanation}")

    print("\n=== canonical rendering (round-trips through the parser) ===")
    print(render_three_steps(suggestion))


if __name__ == "__main__":
    main()
