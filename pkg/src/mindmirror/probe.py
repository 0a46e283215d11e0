"""Endpoint reliability and latency trials against a live local service.

Trials run strictly sequentially per endpoint; latency is client-side wall
clock. The voice probe additionally collects the per-request stage traces
reported by the service, so the output covers both the success-rate table
and the four-stage latency breakdown.
"""

from __future__ import annotations

import base64
import io
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import requests

from .voice import LatencyTrace, make_tone_wav

DEFAULT_TIMEOUT = 30.0

PROBE_COMPONENTS = ("health", "emotion", "voice", "session_save", "cleanup")

COMPONENT_TITLES = {
    "health": "Health check",
    "emotion": "Emotion analysis",
    "voice": "Voice chat",
    "session_save": "Session saving",
    "cleanup": "Temporary cleanup",
}


class ProbeError(Exception):
    pass


@dataclass(frozen=True)
class ProbeSpec:
    endpoint: str
    trials: int

    def __post_init__(self):
        if self.endpoint not in PROBE_COMPONENTS:
            raise ProbeError(f"unknown probe endpoint: {self.endpoint!r}")
        if self.trials < 0:
            raise ProbeError("trials must be >= 0")


def default_plan(trials: int = 30, voice_trials: int = 10) -> list[ProbeSpec]:
    return [
        ProbeSpec("health", trials),
        ProbeSpec("emotion", trials),
        ProbeSpec("voice", voice_trials),
        ProbeSpec("session_save", trials),
        ProbeSpec("cleanup", trials),
    ]


@dataclass
class EndpointResult:
    endpoint: str
    trials: int
    successes: int = 0
    latencies_ms: list[float] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    traces: list[LatencyTrace] = field(default_factory=list)

    @property
    def success_pct(self) -> Optional[float]:
        return None if self.trials == 0 else 100.0 * self.successes / self.trials

    @property
    def mean_ms(self) -> Optional[float]:
        return sum(self.latencies_ms) / len(self.latencies_ms) if self.latencies_ms else None

    @property
    def min_ms(self) -> Optional[float]:
        return min(self.latencies_ms) if self.latencies_ms else None

    @property
    def max_ms(self) -> Optional[float]:
        return max(self.latencies_ms) if self.latencies_ms else None

    def to_json(self) -> dict[str, Any]:
        return {
            "endpoint": self.endpoint,
            "trials": self.trials,
            "successes": self.successes,
            "success_pct": self.success_pct,
            "mean_ms": self.mean_ms,
            "min_ms": self.min_ms,
            "max_ms": self.max_ms,
            "failures": list(self.failures),
            "traces": [t.to_json() for t in self.traces],
        }


@dataclass
class ReliabilityReport:
    base_url: str
    results: list[EndpointResult]

    def result(self, endpoint: str) -> EndpointResult:
        for result in self.results:
            if result.endpoint == endpoint:
                return result
        raise KeyError(endpoint)

    @property
    def voice_traces(self) -> list[LatencyTrace]:
        try:
            return self.result("voice").traces
        except KeyError:
            return []

    def to_json(self) -> dict[str, Any]:
        return {"base_url": self.base_url, "results": [r.to_json() for r in self.results]}


@dataclass
class ProbeFixtures:
    """Request payloads used by the trials; defaults are self-generated."""

    image_b64: str = ""
    voice_wav: bytes = b""

    def __post_init__(self):
        if not self.image_b64:
            self.image_b64 = _tiny_png_b64()
        if not self.voice_wav:
            self.voice_wav = make_tone_wav(1.5)


def _tiny_png_b64(side: int = 32) -> str:
    from PIL import Image

    img = Image.new("RGB", (side, side), (120, 90, 200))
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _manual_record_body() -> dict:
    return {"confirmed_state": "neutral"}


def run_reliability_suite(
    base_url: str,
    plan: Optional[list[ProbeSpec]] = None,
    fixtures: Optional[ProbeFixtures] = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> ReliabilityReport:
    """Execute every planned trial sequentially and collect the results."""
    plan = plan if plan is not None else default_plan()
    fixtures = fixtures or ProbeFixtures()
    base = base_url.rstrip("/")
    session = requests.Session()

    def health_trial() -> None:
        response = session.get(f"{base}/api/health", timeout=timeout)
        _expect(response, 200, lambda body: body.get("status") == "ok")

    def emotion_trial() -> None:
        response = session.post(f"{base}/api/emotion/analyze",
                                json={"image": fixtures.image_b64}, timeout=timeout)
        _expect(response, 200, lambda body: "label" in body.get("prediction", {}))

    def session_trial() -> None:
        response = session.post(f"{base}/api/sessions", json=_manual_record_body(),
                                timeout=timeout)
        _expect(response, 201, lambda body: bool(body.get("id")))

    def cleanup_trial() -> None:
        response = session.post(f"{base}/api/maintenance/cleanup", json={"max_age_s": 0},
                                timeout=timeout)
        _expect(response, 200, lambda body: body.get("failures") == [])

    traces: list[LatencyTrace] = []

    def voice_trial() -> None:
        files = {"audio": ("clip.wav", fixtures.voice_wav, "audio/wav")}
        response = session.post(f"{base}/api/chat", files=files, data={"mode": "voice"},
                                timeout=timeout)
        _expect(response, 200, lambda body: "trace" in body)
        body = response.json()
        traces.append(LatencyTrace.from_json(body["trace"]))
        media_id = body.get("reply_audio_id")
        if media_id:
            # fetch-once: keeps the service's temp dir balanced after the trial
            session.get(f"{base}/api/media/{media_id}", timeout=timeout)

    trial_fns: dict[str, Callable[[], None]] = {
        "health": health_trial,
        "emotion": emotion_trial,
        "voice": voice_trial,
        "session_save": session_trial,
        "cleanup": cleanup_trial,
    }

    results = []
    for spec in plan:
        result = EndpointResult(endpoint=spec.endpoint, trials=spec.trials)
        run = trial_fns[spec.endpoint]
        for i in range(spec.trials):
            start = time.perf_counter()
            try:
                run()
            except Exception as exc:
                result.failures.append(f"trial {i + 1}: {exc}")
            else:
                result.successes += 1
            result.latencies_ms.append((time.perf_counter() - start) * 1000.0)
        if spec.endpoint == "voice":
            result.traces = list(traces)
        results.append(result)
    return ReliabilityReport(base_url=base_url, results=results)


def _expect(response: requests.Response, status: int, check: Callable[[dict], bool]) -> None:
    if response.status_code != status:
        raise ProbeError(f"HTTP {response.status_code}")
    body = response.json()
    if not check(body):
        raise ProbeError("response body failed its check")


def _fmt(value: Optional[float], suffix: str = "") -> str:
    return "-" if value is None else f"{value:.1f}{suffix}"


def format_reliability_table(report: ReliabilityReport) -> str:
    lines = [f"{'Component':<20} {'Trials':>7} {'Success':>9} {'Latency':>12} {'Failures':>9}"]
    for result in report.results:
        title = COMPONENT_TITLES.get(result.endpoint, result.endpoint)
        success = "-" if result.success_pct is None else f"{result.success_pct:.0f}%"
        latency = _fmt(result.mean_ms, " ms")
        lines.append(
            f"{title:<20} {result.trials:>7} {success:>9} {latency:>12} {len(result.failures):>9}"
        )
    return "\n".join(lines)


def format_voice_latency_table(traces: list[LatencyTrace]) -> str:
    if not traces:
        return "No voice traces collected."
    rows = [
        ("Audio capture", [t.capture_ms for t in traces]),
        ("ASR recognition", [t.asr_ms for t in traces]),
        ("LLM response", [t.llm_ms for t in traces]),
        ("TTS synthesis", [t.tts_ms for t in traces]),
        ("End-to-end total", [t.total_ms for t in traces]),
    ]
    lines = [f"{'Metric':<18} {'Mean':>10} {'Min':>10} {'Max':>10}"]
    for name, values in rows:
        mean = sum(values) / len(values)
        lines.append(
            f"{name:<18} {_fmt(mean, ' ms'):>10} {_fmt(min(values), ' ms'):>10} "
            f"{_fmt(max(values), ' ms'):>10}"
        )
    return "\n".join(lines)
