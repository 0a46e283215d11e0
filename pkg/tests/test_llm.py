from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from helpers import GOLDEN_REPLY, dead_port_url

from mindmirror.domain import PromptFields, StepKind
from mindmirror.llm import (
    DEFAULT_TEMPLATE,
    FALLBACK_MESSAGE,
    FallbackUnavailable,
    LlmClientConfig,
    MalformedRuntimeReply,
    OllamaChatClient,
    SAFETY_STATEMENT,
    StructureMismatch,
    build_prompt,
    generate_suggestion,
    parse_three_steps,
    render_three_steps,
    voice_system_text,
)

FIELD_LABELS = (
    "detected_emotion",
    "user_confirmed_state",
    "reflection_blockage",
    "reflection_tried",
    "reflection_goal",
    "session_context",
)

OUTPUT_HEADINGS = (
    "Step 1: Immediate action",
    "Step 2: Short-term strategy",
    "Step 3: Longer-term reminder",
)


def fields(**overrides) -> PromptFields:
    base = dict(
        detected_emotion="sad",
        user_confirmed_state="sad",
        reflection_blockage="refactor stalls",
        reflection_tried="re-read code",
        reflection_goal="finish module",
        session_context="",
    )
    base.update(overrides)
    return PromptFields(**base)


class TestBuildPrompt:
    def test_filled_values_and_empty_context_placeholder(self):
        prompt = build_prompt(fields())
        assert "reflection_blockage: refactor stalls" in prompt.assembled
        assert "session_context: (none)" in prompt.assembled

    def test_all_six_field_labels_present_even_when_optional_fields_empty(self):
        prompt = build_prompt(fields(detected_emotion="", reflection_tried="", session_context=""))
        for label in FIELD_LABELS:
            assert f"- {label}:" in prompt.assembled

    def test_template_like_characters_included_verbatim(self):
        prompt = build_prompt(fields(reflection_blockage="Step 1: is confusing {x}"))
        assert "reflection_blockage: Step 1: is confusing {x}" in prompt.assembled

    def test_rules_present_verbatim(self):
        prompt = build_prompt(fields())
        for rule in DEFAULT_TEMPLATE.rules:
            assert rule in prompt.assembled
        assert "Do not diagnose mental disorders." in prompt.assembled
        assert "Do not provide medical or therapeutic treatment." in prompt.assembled

    def test_output_format_headings_present(self):
        prompt = build_prompt(fields())
        for heading in OUTPUT_HEADINGS:
            assert heading in prompt.assembled

    def test_assembled_is_system_plus_filled(self):
        prompt = build_prompt(fields())
        assert prompt.assembled == prompt.system_instruction + "\n\n" + prompt.filled_template

    def test_byte_deterministic(self):
        f = fields(session_context="- state: sad; goal: ship")
        assert build_prompt(f).assembled == build_prompt(f).assembled

    @given(
        st.builds(
            PromptFields,
            detected_emotion=st.text(max_size=30),
            user_confirmed_state=st.text(min_size=1, max_size=30),
            reflection_blockage=st.text(min_size=1, max_size=120),
            reflection_tried=st.text(max_size=120),
            reflection_goal=st.text(min_size=1, max_size=120),
            session_context=st.text(max_size=200),
        )
    )
    @settings(max_examples=100)
    def test_contract_holds_for_randomized_fields(self, f):
        assembled = build_prompt(f).assembled
        for label in FIELD_LABELS:
            assert f"- {label}:" in assembled
        for rule in DEFAULT_TEMPLATE.rules:
            assert rule in assembled
        for heading in OUTPUT_HEADINGS:
            assert heading in assembled
        assert build_prompt(f).assembled == assembled


class TestVoiceSystemText:
    def test_carries_safety_rules_without_reflection_slots(self):
        text = voice_system_text()
        for rule in DEFAULT_TEMPLATE.rules:
            assert rule in text
        assert "reflection_blockage" not in text
        assert "Step 1" not in text


class TestGenerateSuggestion:
    def test_passthrough_from_mock_runtime(self, llm_ok):
        config = LlmClientConfig(endpoint_url=llm_ok.url, max_retries=0)
        reply = generate_suggestion(build_prompt(fields()), config)
        assert reply == GOLDEN_REPLY

    def test_unreachable_endpoint_retries_then_fallback(self):
        config = LlmClientConfig(endpoint_url=dead_port_url(), max_retries=1,
                                 request_timeout=0.5)
        with pytest.raises(FallbackUnavailable) as err:
            generate_suggestion(build_prompt(fields()), config)
        assert SAFETY_STATEMENT in err.value.fallback_message

    def test_http_500_consumes_exactly_retry_budget(self, mock_llm):
        mock_llm.behavior = "http500"
        before = mock_llm.requests
        config = LlmClientConfig(endpoint_url=mock_llm.url, max_retries=1)
        with pytest.raises(FallbackUnavailable):
            generate_suggestion(build_prompt(fields()), config)
        assert mock_llm.requests - before == 2  # initial try + 1 retry
        mock_llm.behavior = "ok"

    def test_empty_200_body_is_malformed_reply(self, mock_llm):
        mock_llm.behavior = "empty"
        config = LlmClientConfig(endpoint_url=mock_llm.url, max_retries=0)
        with pytest.raises(MalformedRuntimeReply):
            generate_suggestion(build_prompt(fields()), config)
        mock_llm.behavior = "ok"

    def test_missing_content_is_malformed_reply(self, mock_llm):
        mock_llm.behavior = "no_content"
        config = LlmClientConfig(endpoint_url=mock_llm.url, max_retries=0)
        with pytest.raises(MalformedRuntimeReply):
            generate_suggestion(build_prompt(fields()), config)
        mock_llm.behavior = "ok"

    def test_reachable_probe(self, llm_ok):
        assert OllamaChatClient(LlmClientConfig(endpoint_url=llm_ok.url)).reachable()
        assert not OllamaChatClient(LlmClientConfig(endpoint_url=dead_port_url())).reachable(0.3)

    def test_config_rejects_nonpositive_timeout(self):
        with pytest.raises(ValueError):
            LlmClientConfig(request_timeout=0)
        with pytest.raises(ValueError):
            LlmClientConfig(max_retries=-1)


class TestParseThreeSteps:
    def test_golden_reply_parses_to_three_kinds(self):
        suggestion = parse_three_steps(GOLDEN_REPLY)
        assert [s.kind for s in suggestion.steps] == [
            StepKind.IMMEDIATE, StepKind.SHORT_TERM, StepKind.LONGER_TERM,
        ]
        assert suggestion.steps[0].action == "Stand up and stretch for two minutes."
        assert suggestion.raw_text == GOLDEN_REPLY

    def test_two_steps_only_is_mismatch(self):
        truncated = GOLDEN_REPLY.split("Step 3")[0]
        with pytest.raises(StructureMismatch):
            parse_three_steps(truncated)

    def test_leading_prose_is_ignored_for_steps(self):
        prefixed = "Sure! Here is a plan that may help you today.\n\n" + GOLDEN_REPLY
        assert parse_three_steps(prefixed).steps == parse_three_steps(GOLDEN_REPLY).steps

    def test_four_steps_is_mismatch(self):
        extra = GOLDEN_REPLY + "\n\nStep 4: Bonus\n- Action: more\n- Explanation: more"
        with pytest.raises(StructureMismatch):
            parse_three_steps(extra)

    def test_duplicate_step_heading_is_mismatch(self):
        doubled = GOLDEN_REPLY + "\n\nStep 2: Again\n- Action: x\n- Explanation: y"
        with pytest.raises(StructureMismatch):
            parse_three_steps(doubled)

    def test_missing_explanation_is_mismatch(self):
        broken = GOLDEN_REPLY.replace("- Explanation: A short physical reset interrupts the stall loop.", "")
        with pytest.raises(StructureMismatch):
            parse_three_steps(broken)

    def test_headings_are_case_insensitive_and_tolerate_markup(self):
        reply = GOLDEN_REPLY.replace("Step 1", "**STEP 1").replace("- Action:", "* ACTION:")
        suggestion = parse_three_steps(reply)
        assert suggestion.steps[0].action == "Stand up and stretch for two minutes."

    def test_multiline_field_folds_with_spaces(self):
        reply = GOLDEN_REPLY.replace(
            "- Explanation: A short physical reset interrupts the stall loop.",
            "- Explanation: A short physical reset\n  interrupts the stall loop.",
        )
        suggestion = parse_three_steps(reply)
        assert suggestion.steps[0].explanation == "A short physical reset interrupts the stall loop."

    def test_empty_reply_is_mismatch(self):
        with pytest.raises(StructureMismatch):
            parse_three_steps("")


single_line = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Cc")),
    min_size=1,
    max_size=60,
).map(lambda s: " ".join(s.split())).filter(bool)


class TestRenderParseRoundTrip:
    @given(parts=st.lists(single_line, min_size=6, max_size=6))
    @settings(max_examples=60)
    def test_round_trip_equality(self, parts):
        from mindmirror.domain import SuggestionStep, ThreeStepSuggestion

        steps = tuple(
            SuggestionStep(kind=k, action=parts[i * 2], explanation=parts[i * 2 + 1])
            for i, k in enumerate((StepKind.IMMEDIATE, StepKind.SHORT_TERM, StepKind.LONGER_TERM))
        )
        original = ThreeStepSuggestion(steps=steps, raw_text="")
        rendered = render_three_steps(original)
        assert parse_three_steps(rendered).steps == original.steps

    def test_fallback_message_carries_safety_statement(self):
        assert SAFETY_STATEMENT in FALLBACK_MESSAGE
