"""Acceptance suite: one test per release criterion, with a printed verdict.

Run with `pytest -s tests/test_acceptance.py` to see the PASS/FAIL lines.
"""

from __future__ import annotations

import functools
import json
import random
import time
from collections import Counter
from datetime import date, datetime, timedelta, timezone
from decimal import Decimal

import numpy as np
from fastapi.testclient import TestClient

from helpers import GOLDEN_REPLY, LiveServer, dead_port_url, png_base64

from mindmirror.domain import (
    CANONICAL_LABELS,
    EmotionLabel,
    PromptFields,
    ReflectionEntry,
    StepKind,
    SuggestionStep,
    ThreeStepSuggestion,
    make_record,
)
from mindmirror.emotion import StubClassifier
from mindmirror.llm import (
    DEFAULT_TEMPLATE,
    LlmClientConfig,
    OllamaChatClient,
    SAFETY_STATEMENT,
    StubChatClient,
    build_prompt,
)
from mindmirror.metrics import (
    ConfusionMatrix,
    class_metrics,
    macro_average,
    overall_accuracy,
    per_class_accuracy,
    percent_2dp,
    round_half_up,
    score_pairs,
)
from mindmirror.probe import ProbeSpec, run_reliability_suite
from mindmirror.reports import compute_daily_report, compute_weekly_report
from mindmirror.service import AppComponents, create_app
from mindmirror.store import SessionStore
from mindmirror.voice import DelayedConverter, StubStt, StubTts, make_tone_wav


def criterion(name):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"FAIL  {name}")
                raise
            print(f"PASS  {name}")
            return result

        return run

    return wrap


# --- shared fixtures ----------------------------------------------------------

DIAGNOSTIC_ROWS = {
    EmotionLabel.DISGUST: [10, 117, 1, 6, 2, 2, 0],
    EmotionLabel.FEAR: [0, 0, 125, 1, 1, 2, 14],
    EmotionLabel.SURPRISE: [0, 1, 7, 3, 1, 1, 206],
}

PER_CLASS_BENCHMARK = {
    EmotionLabel.ANGRY: (1095, 43.56, 93.79),
    EmotionLabel.DISGUST: (686, 49.85, 93.29),
    EmotionLabel.FEAR: (715, 36.22, 92.17),
    EmotionLabel.HAPPY: (1683, 88.53, 98.34),
    EmotionLabel.NEUTRAL: (594, 70.71, 91.92),
    EmotionLabel.SAD: (900, 35.22, 92.11),
    EmotionLabel.SURPRISE: (1094, 66.91, 94.88),
}

TOL = 5e-5


def diagnostic_pairs():
    pairs = []
    for true, row in DIAGNOSTIC_ROWS.items():
        for predicted, count in zip(CANONICAL_LABELS, row):
            pairs.extend([(true, predicted)] * count)
    return pairs


def reconstructed(which: str) -> ConfusionMatrix:
    idx = 1 if which == "baseline" else 2
    counts = np.zeros((7, 7), dtype=np.int64)
    for i, label in enumerate(CANONICAL_LABELS):
        support, *pcts = PER_CLASS_BENCHMARK[label]
        correct = int(round_half_up(pcts[idx - 1] * support / 100.0))
        counts[i, i] = correct
        counts[i, (i + 1) % 7] += support - correct
    return ConfusionMatrix(counts)


def stub_components(tmp_path, llm_client=None, **voice_kwargs) -> AppComponents:
    scores = {l: (0.9 if l is EmotionLabel.HAPPY else 0.1 / 6) for l in EmotionLabel}
    return AppComponents(
        store=SessionStore(tmp_path / "records", tmp_path / "tmp"),
        backend=StubClassifier(default_scores=scores),
        llm_client=llm_client or StubChatClient(reply=GOLDEN_REPLY),
        **voice_kwargs,
    )


# --- criteria -----------------------------------------------------------------


@criterion("diagnostic-subset reproduction (500 pairs -> published P/R/F1, <1s)")
def test_diagnostic_subset_reproduction(tmp_path):
    from mindmirror.cli import main

    pairs = diagnostic_pairs()
    assert len(pairs) == 500
    manifest = tmp_path / "diagnostic.csv"
    manifest.write_text(
        "true_label,pred_label\n"
        + "\n".join(f"{t.value},{p.value}" for t, p in pairs)
        + "\n",
        encoding="utf-8",
    )
    out = tmp_path / "report.json"

    started = time.perf_counter()
    code = main(["eval", "score", "--pairs", str(manifest), "--json-out", str(out)])
    elapsed = time.perf_counter() - started
    assert code == 0
    assert elapsed < 1.0, f"eval score took {elapsed:.3f}s"

    report = json.loads(out.read_text())
    expected = {
        "disgust": (0.9915, 0.8478, 0.9141),
        "fear": (0.9398, 0.8741, 0.9058),
        "surprise": (0.9364, 0.9406, 0.9385),
    }
    for name, (precision, recall, f1) in expected.items():
        got = report["class_metrics"][name]
        assert abs(got["precision"] - precision) <= TOL, (name, "precision")
        assert abs(got["recall"] - recall) <= TOL, (name, "recall")
        assert abs(got["f1"] - f1) <= TOL, (name, "f1")
    macro = report["macro"]
    assert abs(macro["precision"] - 0.9559) <= TOL
    assert abs(macro["recall"] - 0.8875) <= TOL
    assert abs(macro["f1"] - 0.9195) <= TOL
    assert macro["support"] == 500
    assert report["overall_accuracy_pct"] == "89.60"


@criterion("headline accuracy arithmetic (59.66% / 94.49% / +34.83)")
def test_headline_accuracy_arithmetic():
    baseline = reconstructed("baseline")
    tuned = reconstructed("fine_tuned")
    assert (baseline.trace, baseline.total) == (4037, 6767)
    assert (tuned.trace, tuned.total) == (6394, 6767)
    base_pct = percent_2dp(overall_accuracy(baseline))
    tuned_pct = percent_2dp(overall_accuracy(tuned))
    assert base_pct == Decimal("59.66")
    assert tuned_pct == Decimal("94.49")
    assert tuned_pct - base_pct == Decimal("34.83")


@criterion("per-class reconstruction consistency + 10k brute-force fuzz at 1e-12")
def test_per_class_reconstruction_and_fuzz():
    assert reconstructed("baseline").trace == 4037
    tuned = reconstructed("fine_tuned")
    assert tuned.trace == 6394
    accuracy = per_class_accuracy(tuned)
    for label, (_, _, expected_pct) in PER_CLASS_BENCHMARK.items():
        assert percent_2dp(accuracy[label]) == Decimal(f"{expected_pct:.2f}"), label.value

    # brute-force equivalence fuzz
    def brute(pairs, label):
        tp = sum(1 for t, p in pairs if t == label and p == label)
        predicted = sum(1 for _, p in pairs if p == label)
        actual = sum(1 for t, _ in pairs if t == label)
        precision = tp / predicted if predicted else 0.0
        recall = tp / actual if actual else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return precision, recall, f1

    rng = random.Random(161803)
    pool = list(CANONICAL_LABELS)
    for case in range(10_000):
        n = rng.randint(0, 12)
        pairs = [(rng.choice(pool), rng.choice(pool)) for _ in range(n)]
        matrix = score_pairs(pairs)
        assert matrix.total == n
        label = rng.choice(pool)
        ours = class_metrics(matrix, label)
        ref = brute(pairs, label)
        assert abs(ours.precision - ref[0]) <= 1e-12
        assert abs(ours.recall - ref[1]) <= 1e-12
        assert abs(ours.f1 - ref[2]) <= 1e-12
        if n:
            expected_acc = sum(1 for t, p in pairs if t == p) / n
            assert abs(overall_accuracy(matrix) - expected_acc) <= 1e-12
            present = sorted({t for t, _ in pairs}, key=pool.index)
            if present:
                ref_macro = [brute(pairs, l) for l in present]
                macro = macro_average(matrix)
                for i, part in enumerate(("precision", "recall", "f1")):
                    want = sum(m[i] for m in ref_macro) / len(ref_macro)
                    assert abs(getattr(macro, part) - want) <= 1e-12


@criterion("reliability suite vs live service (30/30 x health, emotion, session, cleanup; <60s)")
def test_reliability_suite_against_live_service(tmp_path):
    components = stub_components(tmp_path)
    server = LiveServer(create_app(components))
    try:
        plan = [
            ProbeSpec("health", 30),
            ProbeSpec("emotion", 30),
            ProbeSpec("session_save", 30),
            ProbeSpec("cleanup", 30),
        ]
        started = time.perf_counter()
        report = run_reliability_suite(server.base_url, plan)
        elapsed = time.perf_counter() - started
    finally:
        server.stop()
    assert elapsed < 60.0, f"suite took {elapsed:.1f}s"
    for endpoint in ("health", "emotion", "session_save", "cleanup"):
        result = report.result(endpoint)
        assert result.trials == 30
        assert result.successes == 30, result.failures
        assert result.success_pct == 100.0


@criterion("voice latency accounting (15/165/820/210 stubs; total = sum; mean 1210±50)")
def test_voice_latency_accounting(tmp_path):
    components = stub_components(
        tmp_path,
        llm_client=StubChatClient(reply=GOLDEN_REPLY, delay_ms=820),
        stt=StubStt(default="quick check-in", delay_ms=165),
        tts=StubTts(delay_ms=210),
        converter=DelayedConverter(15),
    )
    server = LiveServer(create_app(components))
    try:
        report = run_reliability_suite(server.base_url, [ProbeSpec("voice", 10)])
    finally:
        server.stop()
    result = report.result("voice")
    assert result.successes == 10, result.failures
    traces = result.traces
    assert len(traces) == 10
    for trace in traces:
        assert trace.total_ms == (
            trace.capture_ms + trace.asr_ms + trace.llm_ms + trace.tts_ms
        )
    mean_total = sum(t.total_ms for t in traces) / len(traces)
    assert abs(mean_total - 1210.0) <= 50.0, f"mean total {mean_total:.1f} ms"


@criterion("prompt contract (100 randomized fields; labels+rules+headings; deterministic)")
def test_prompt_contract():
    field_labels = [
        "detected_emotion", "user_confirmed_state", "reflection_blockage",
        "reflection_tried", "reflection_goal", "session_context",
    ]
    headings = ["Step 1: Immediate action", "Step 2: Short-term strategy",
                "Step 3: Longer-term reminder"]
    rng = random.Random(31415)

    def random_text(allow_empty=False):
        alphabet = "abcdefghijklmnopqrstuvwxyz {}<>:\n你好é"
        n = rng.randint(0 if allow_empty else 1, 80)
        return "".join(rng.choice(alphabet) for _ in range(n))

    for _ in range(100):
        fields = PromptFields(
            detected_emotion=random_text(allow_empty=True),
            user_confirmed_state=random_text(),
            reflection_blockage=random_text(),
            reflection_tried=random_text(allow_empty=True),
            reflection_goal=random_text(),
            session_context=random_text(allow_empty=True),
        )
        assembled = build_prompt(fields).assembled
        for label in field_labels:
            assert f"- {label}:" in assembled, label
        for rule in DEFAULT_TEMPLATE.rules:
            assert rule in assembled, rule
        for heading in headings:
            assert heading in assembled, heading
        assert build_prompt(fields).assembled == assembled  # byte-deterministic


@criterion("degradation (LLM down -> 200, fallback true, safety text, one record)")
def test_llm_down_degradation(tmp_path):
    llm = OllamaChatClient(LlmClientConfig(endpoint_url=dead_port_url(),
                                           request_timeout=0.3, max_retries=1))
    components = stub_components(tmp_path, llm_client=llm)
    client = TestClient(create_app(components))
    before = len(components.store.all_records())
    response = client.post("/api/chat", json={
        "mode": "reflect",
        "confirmed_state": "sad",
        "reflection": {"blockage": "stuck at a failing deploy", "tried": "retried twice",
                       "goal": "get the release out"},
    })
    assert response.status_code == 200
    body = response.json()
    assert body["fallback"] is True
    assert SAFETY_STATEMENT in body["message"]
    records = components.store.all_records()
    assert len(records) == before + 1
    assert records[-1].suggestion is None


@criterion("data-policy (200 mixed fault-injected requests; temp balanced; delete removes)")
def test_data_policy_properties(tmp_path):
    tts = StubTts()
    components = stub_components(
        tmp_path,
        stt=StubStt(default="voice note"),
        tts=tts,
    )
    client = TestClient(create_app(components), raise_server_exceptions=False)
    temp = components.store.temp_root
    before = len(list(temp.iterdir()))

    clip = make_tone_wav(0.3)
    rng = random.Random(271828)
    sent = 0
    while sent < 200:
        kind = rng.randrange(6)
        if kind == 0:
            assert client.post("/api/emotion/analyze",
                               json={"image": png_base64(16, 16)}).status_code == 200
        elif kind == 1:
            assert client.post("/api/emotion/analyze",
                               json={"image": "!!broken!!"}).status_code == 400
        elif kind == 2:
            assert client.post("/api/emotion/analyze", json={}).status_code == 400
        elif kind == 3:
            tts.fail = False
            body = client.post("/api/chat", files={"audio": ("c.wav", clip, "audio/wav")})
            assert body.status_code == 200
            media_id = body.json().get("reply_audio_id")
            if media_id:
                assert client.get(f"/api/media/{media_id}").status_code == 200
        elif kind == 4:
            tts.fail = True  # degraded voice reply, no media written
            body = client.post("/api/chat", files={"audio": ("c.wav", clip, "audio/wav")})
            assert body.status_code == 200
            assert "reply_audio_id" not in body.json()
        else:
            assert client.post(
                "/api/chat", files={"audio": ("c.bin", b"\x00\x01junk", "application/octet-stream")}
            ).status_code == 400
        sent += 1

    assert len(list(temp.iterdir())) == before

    # deletion removes the record from reads and from rebuilt reports
    day = "2025-03-03"
    ids = []
    for hour, state in ((9, "sad"), (10, "sad"), (11, "happy")):
        response = client.post("/api/sessions", json={
            "confirmed_state": state, "timestamp": f"{day}T{hour:02d}:00:00Z",
        })
        ids.append(response.json()["id"])
    report_before = client.get(f"/api/reports/daily?date={day}").json()
    assert report_before["state_distribution"]["sad"] == 2
    assert client.delete(f"/api/sessions/{ids[0]}").status_code == 204
    listed = client.get(f"/api/sessions?from={day}&to=2025-03-04").json()["records"]
    assert all(r["id"] != ids[0] for r in listed)
    report_after = client.get(f"/api/reports/daily?date={day}").json()
    assert report_after["state_distribution"]["sad"] == 1
    assert report_after["total_checks"] == report_before["total_checks"] - 1
    assert report_after["trend"][9]["count"] == report_before["trend"][9]["count"] - 1


@criterion("store/report oracle (1000 randomized record sets, field-for-field)")
def test_store_report_oracle():
    rng = random.Random(577215)
    day = date(2025, 1, 15)
    monday = date.fromisocalendar(2025, 3, 1)

    def random_records():
        records = []
        for i in range(rng.randint(0, 10)):
            offset_day = monday + timedelta(days=rng.randint(0, 6))
            when = datetime(offset_day.year, offset_day.month, offset_day.day,
                            rng.randint(0, 23), rng.randint(0, 59), rng.randint(0, 59),
                            tzinfo=timezone.utc)
            reflection = None
            suggestion = None
            if rng.random() < 0.7:
                reflection = ReflectionEntry(
                    blockage=f"blockage {i} " + "b" * rng.randint(0, 240),
                    tried="", goal=f"goal {i}",
                )
                if rng.random() < 0.5:
                    steps = tuple(
                        SuggestionStep(kind=k, action=f"a{i}{k.value}", explanation="e")
                        for k in (StepKind.IMMEDIATE, StepKind.SHORT_TERM, StepKind.LONGER_TERM)
                    )
                    suggestion = ThreeStepSuggestion(steps=steps, raw_text="r")
            records.append(make_record(
                rng.choice(list(CANONICAL_LABELS)),
                reflection=reflection, suggestion=suggestion, timestamp=when,
            ))
        return records

    def oracle(records, starts, width):
        ordered = sorted(records, key=lambda r: (r.timestamp, r.id))
        dist = Counter(r.confirmed_state for r in ordered)
        buckets = []
        for start in starts:
            inside = [r for r in ordered if start <= r.timestamp < start + width]
            if inside:
                c = Counter(r.confirmed_state for r in inside)
                top = max(c.values())
                label = next(l for l in CANONICAL_LABELS if c.get(l, 0) == top)
            else:
                label = None
            buckets.append((start, label, len(inside)))
        newest = list(reversed(ordered))
        return {
            "dist": {l: dist.get(l, 0) for l in CANONICAL_LABELS},
            "buckets": buckets,
            "blockages": [r.reflection.blockage.strip()[:200] for r in newest
                          if r.reflection and r.reflection.blockage.strip()][:5],
            "suggestions": [r.suggestion.steps[0].action for r in newest if r.suggestion][:5],
            "goals": [r.reflection.goal.strip() for r in newest
                      if r.reflection and r.reflection.goal.strip()][:3],
            "total": len(ordered),
        }

    def check(report, expected):
        assert report.state_distribution == expected["dist"]
        assert [(b.start, b.label, b.count) for b in report.trend] == expected["buckets"]
        assert list(report.blockage_summaries) == expected["blockages"]
        assert list(report.suggestion_summaries) == expected["suggestions"]
        assert list(report.next_steps) == expected["goals"]
        assert report.total_checks == expected["total"]

    for case in range(1000):
        records = random_records()
        in_day = [r for r in records if r.timestamp.date() == day]
        day_start = datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
        daily = compute_daily_report(records, day)
        check(daily, oracle(in_day, [day_start + timedelta(hours=h) for h in range(24)],
                            timedelta(hours=1)))

        weekly = compute_weekly_report(records, 2025, 3)
        week_start = datetime(monday.year, monday.month, monday.day, tzinfo=timezone.utc)
        in_week = [r for r in records
                   if week_start <= r.timestamp < week_start + timedelta(days=7)]
        check(weekly, oracle(in_week, [week_start + timedelta(days=d) for d in range(7)],
                             timedelta(days=1)))
