"""HTTP surface: health, emotion analysis, chat (reflect/voice), sessions,
reports, media fetch, and temp maintenance.

Local-first posture: binds loopback by default, CORS restricted to
localhost origins, error bodies carry {code, message} with no filesystem
detail, and an LLM outage on a chat route is never surfaced as an HTTP
error (the user always gets a response).

All store mutations funnel through one lock, honoring the store's
single-writer contract; handlers are otherwise stateless.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import date, datetime, time as dtime, timedelta, timezone
from pathlib import Path
from typing import Any, Mapping, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import emotion as emotion_mod
from . import llm as llm_mod
from . import store as store_mod
from . import voice as voice_mod
from .domain import (
    EmotionLabel,
    EmotionPrediction,
    PromptFields,
    ReflectionEntry,
    SessionRecord,
    ThreeStepSuggestion,
    make_record,
    parse_timestamp,
    utc_now,
    validate_record,
)
from .emotion import ClassifierBackend, StubClassifier, analyze_base64, load_backend
from .llm import (
    DEFAULT_TEMPLATE,
    FallbackUnavailable,
    LlmClientConfig,
    MalformedRuntimeReply,
    OllamaChatClient,
    PromptTemplate,
    StructureMismatch,
    build_prompt,
    parse_three_steps,
)
from .reports import build_daily_report, build_weekly_report, parse_iso_week, recent_context
from .store import MediaVault, SessionStore
from .voice import VoicePipeline

MAX_IMAGE_BYTES = 10 * 1024 * 1024
MAX_AUDIO_BYTES = 20 * 1024 * 1024
HEALTH_PROBE_TIMEOUT = 1.0

API_ROUTES = [
    "GET /api/health",
    "POST /api/emotion/analyze",
    "POST /api/chat",
    "POST /api/sessions",
    "GET /api/sessions",
    "DELETE /api/sessions/{id}",
    "GET /api/reports/daily",
    "GET /api/reports/weekly",
    "GET /api/media/{id}",
    "POST /api/maintenance/cleanup",
]


class ApiFault(Exception):
    """Request-shape faults raised inside handlers (closed-code set)."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


# Every module error maps to exactly one (status, code); 4xx caller faults,
# 5xx backend faults. Codes mirror the module error names.
ERROR_MAP: dict[type, tuple[int, str]] = {
    emotion_mod.EmptyPayload: (400, "EmptyPayload"),
    emotion_mod.MalformedBase64: (400, "MalformedBase64"),
    emotion_mod.UnsupportedFormat: (400, "UnsupportedFormat"),
    emotion_mod.DegenerateImage: (400, "DegenerateImage"),
    emotion_mod.BackendUnavailable: (503, "BackendUnavailable"),
    emotion_mod.InferenceFailure: (500, "InferenceFailure"),
    llm_mod.FallbackUnavailable: (503, "FallbackUnavailable"),
    llm_mod.MalformedRuntimeReply: (502, "MalformedRuntimeReply"),
    llm_mod.StructureMismatch: (502, "StructureMismatch"),
    store_mod.InvalidRecord: (400, "InvalidRecord"),
    store_mod.DuplicateRecordId: (409, "DuplicateRecordId"),
    store_mod.RecordNotFound: (404, "RecordNotFound"),
    store_mod.InvalidRange: (400, "InvalidRange"),
    store_mod.IoFailure: (500, "IoFailure"),
    voice_mod.CorruptContainer: (400, "CorruptContainer"),
    voice_mod.UnsupportedCodec: (415, "UnsupportedCodec"),
    voice_mod.SttUnavailable: (503, "SttUnavailable"),
    voice_mod.TtsUnavailable: (503, "TtsUnavailable"),
}

# Request-shape faults raised by the HTTP layer itself.
REQUEST_FAULT_CODES = {"MissingField", "MalformedRequest", "PayloadTooLarge", "MediaNotFound"}

ALL_ERROR_CODES = {code for _, code in ERROR_MAP.values()} | REQUEST_FAULT_CODES


@dataclass
class AppComponents:
    """Everything the service needs, already constructed."""

    store: SessionStore
    backend: ClassifierBackend
    llm_client: Any
    stt: Optional[voice_mod.SttAdapter] = None
    tts: Optional[voice_mod.TtsAdapter] = None
    converter: Any = voice_mod.convert_audio
    template: PromptTemplate = DEFAULT_TEMPLATE
    static_dir: Optional[Path] = None
    media: Optional[MediaVault] = None  # defaulted from the store's temp root

    def __post_init__(self):
        if self.media is None:
            self.media = MediaVault(self.store.temp_root)


def components_from_config(config: Mapping[str, Any] | Path | str) -> AppComponents:
    """Build components from a JSON config mapping/file plus env overrides.

    Recognized env vars: MINDMIRROR_STORE_ROOT, MINDMIRROR_TEMP_ROOT and the
    MINDMIRROR_LLM_* family.
    """
    if isinstance(config, (str, Path)):
        config = json.loads(Path(config).read_text(encoding="utf-8"))
    config = dict(config or {})

    store_root = os.environ.get("MINDMIRROR_STORE_ROOT", config.get("store_root", "mindmirror-data"))
    temp_root = os.environ.get("MINDMIRROR_TEMP_ROOT", config.get("temp_root"))
    store = SessionStore(store_root, temp_root)

    backend = load_backend(config.get("backend", {"kind": "stub"}))

    llm_defaults = LlmClientConfig.from_env()
    llm_cfg = config.get("llm", {})
    llm_config = LlmClientConfig(
        endpoint_url=llm_cfg.get("endpoint_url", llm_defaults.endpoint_url),
        model_name=llm_cfg.get("model_name", llm_defaults.model_name),
        request_timeout=float(llm_cfg.get("request_timeout", llm_defaults.request_timeout)),
        max_retries=int(llm_cfg.get("max_retries", llm_defaults.max_retries)),
    )

    stt = tts = None
    speech = config.get("speech", {})
    if "stt" in speech:
        stt = _speech_adapter(speech["stt"], kind="stt")
    if "tts" in speech:
        tts = _speech_adapter(speech["tts"], kind="tts")

    static_dir = config.get("static_dir")
    return AppComponents(
        store=store,
        backend=backend,
        llm_client=OllamaChatClient(llm_config),
        stt=stt,
        tts=tts,
        static_dir=Path(static_dir) if static_dir else None,
    )


def _speech_adapter(spec: Mapping[str, Any], kind: str):
    adapter_kind = spec.get("kind", "stub")
    if adapter_kind == "stub":
        if kind == "stt":
            return voice_mod.StubStt(default=spec.get("default", ""))
        return voice_mod.StubTts()
    if adapter_kind == "http":
        api_key = os.environ.get(spec["api_key_env"]) if spec.get("api_key_env") else None
        cls = voice_mod.HttpSttAdapter if kind == "stt" else voice_mod.HttpTtsAdapter
        return cls(url=spec["url"], api_key=api_key)
    raise ValueError(f"unknown {kind} adapter kind: {adapter_kind!r}")


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _parse_instant(text: str, name: str) -> datetime:
    try:
        if len(text) == 10:  # date-only form
            return datetime.combine(date.fromisoformat(text), dtime.min, tzinfo=timezone.utc)
        return parse_timestamp(text)
    except ValueError as exc:
        raise ApiFault(400, "MalformedRequest", f"query field {name!r} is not a valid instant") from exc


def _prediction_from_body(data: Any) -> EmotionPrediction:
    if not isinstance(data, Mapping):
        raise ApiFault(400, "MalformedRequest", "detected_emotion must be a prediction object")
    try:
        return EmotionPrediction.from_json(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise ApiFault(400, "MalformedRequest", f"detected_emotion is malformed: {exc}") from exc


def create_app(components: AppComponents) -> FastAPI:
    app = FastAPI(title="mindmirror", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"^https?://(localhost|127\.0\.0\.1)(:\d+)?$",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    store = components.store
    write_lock = threading.Lock()
    pipeline = VoicePipeline(
        llm_client=components.llm_client,
        stt=components.stt,
        tts=components.tts,
        media=components.media,
        converter=components.converter,
        template=components.template,
    )

    @app.exception_handler(ApiFault)
    async def _handle_fault(_request: Request, exc: ApiFault):
        return _error_response(exc.status, exc.code, exc.message)

    for exc_type, (status, code) in ERROR_MAP.items():
        def _make(status=status, code=code):
            async def _handler(_request: Request, exc: Exception):
                return _error_response(status, code, str(exc))
            return _handler

        app.add_exception_handler(exc_type, _make())

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "model_loaded": components.backend.ready(),
            "llm_reachable": components.llm_client.reachable(HEALTH_PROBE_TIMEOUT),
            "routes": API_ROUTES,
            "speech": {"configured": pipeline.configured, "external": pipeline.external},
        }

    @app.post("/api/emotion/analyze")
    async def emotion_analyze(request: Request):
        body = await _json_body(request)
        payload = body.get("image")
        if payload is None:
            raise ApiFault(400, "MissingField", "body is missing the 'image' field")
        if not isinstance(payload, str):
            raise ApiFault(400, "MalformedRequest", "'image' must be a base64 string")
        if len(payload) * 3 // 4 > MAX_IMAGE_BYTES:
            raise ApiFault(413, "PayloadTooLarge", "image exceeds the 10 MB limit")
        prediction = analyze_base64(payload, components.backend)
        return {"prediction": prediction.to_json()}

    @app.post("/api/chat")
    async def chat(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            return await _voice_chat(request)
        return _reflect_chat(await _json_body(request))

    async def _json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception as exc:
            raise ApiFault(400, "MalformedRequest", "body is not valid JSON") from exc
        if not isinstance(body, dict):
            raise ApiFault(400, "MalformedRequest", "body must be a JSON object")
        return body

    def _reflect_chat(body: dict):
        if body.get("mode", "reflect") != "reflect":
            raise ApiFault(400, "MalformedRequest", f"unknown chat mode: {body.get('mode')!r}")
        try:
            confirmed = EmotionLabel(body["confirmed_state"])
        except KeyError:
            raise ApiFault(400, "MissingField", "body is missing 'confirmed_state'") from None
        except ValueError:
            raise ApiFault(400, "MalformedRequest", "confirmed_state is not a known label") from None
        reflection_body = body.get("reflection")
        if not isinstance(reflection_body, Mapping):
            raise ApiFault(400, "MissingField", "reflect mode requires a 'reflection' object")
        reflection = ReflectionEntry(
            blockage=str(reflection_body.get("blockage", "")),
            tried=str(reflection_body.get("tried", "")),
            goal=str(reflection_body.get("goal", "")),
        )
        if reflection.violations():
            raise ApiFault(400, "MalformedRequest",
                           "; ".join(reflection.violations()))
        detected = None
        if "detected_emotion" in body and body["detected_emotion"] is not None:
            detected = _prediction_from_body(body["detected_emotion"])

        fields = PromptFields(
            detected_emotion=detected.label.value if detected else "",
            user_confirmed_state=confirmed.value,
            reflection_blockage=reflection.blockage,
            reflection_tried=reflection.tried,
            reflection_goal=reflection.goal,
            session_context=recent_context(store, utc_now()),
        )
        prompt = build_prompt(fields, components.template)

        suggestion = None
        extras: dict[str, Any] = {}
        response: dict[str, Any] = {"fallback": False}
        try:
            raw = components.llm_client.chat(prompt.system_instruction, prompt.filled_template)
        except (FallbackUnavailable, MalformedRuntimeReply) as exc:
            message = getattr(exc, "fallback_message", llm_mod.FALLBACK_MESSAGE)
            response = {"fallback": True, "message": message}
        else:
            try:
                suggestion = parse_three_steps(raw)
                response["suggestion"] = suggestion.to_json()
            except StructureMismatch:
                extras = {"raw_reply": raw, "parse_failed": True}
                response["raw_reply"] = raw
                response["parse_failed"] = True

        record = make_record(
            confirmed,
            detected_emotion=detected,
            reflection=reflection,
            suggestion=suggestion,
            extras=extras,
        )
        with write_lock:
            store.save_record(record)
        response["record_id"] = record.id
        return response

    async def _voice_chat(request: Request):
        form = await request.form()
        if form.get("mode", "voice") != "voice":
            raise ApiFault(400, "MalformedRequest", f"unknown chat mode: {form.get('mode')!r}")
        upload = form.get("audio")
        if upload is None:
            raise ApiFault(400, "MissingField", "multipart body is missing the 'audio' file")
        audio = await upload.read() if hasattr(upload, "read") else bytes(upload, "utf-8")
        if len(audio) > MAX_AUDIO_BYTES:
            raise ApiFault(413, "PayloadTooLarge", "audio exceeds the 20 MB limit")
        result = pipeline.voice_chat(audio)
        body: dict[str, Any] = {
            "reply_text": result.reply_text,
            "transcript": result.transcript,
            "fallback": result.fallback,
            "trace": result.trace.to_json(),
        }
        if result.reply_audio_id is not None:
            body["reply_audio_id"] = result.reply_audio_id
        return body

    @app.post("/api/sessions", status_code=201)
    async def save_session(request: Request):
        body = await _json_body(request)
        record = _record_from_body(body)
        with write_lock:
            store.save_record(record)
        return {"id": record.id}

    def _record_from_body(body: dict) -> SessionRecord:
        try:
            confirmed = EmotionLabel(body["confirmed_state"])
        except KeyError:
            raise ApiFault(400, "MissingField", "record is missing 'confirmed_state'") from None
        except ValueError:
            raise ApiFault(400, "MalformedRequest", "confirmed_state is not a known label") from None
        detected = None
        if body.get("detected_emotion") is not None:
            detected = _prediction_from_body(body["detected_emotion"])
        reflection = None
        if body.get("reflection") is not None:
            try:
                reflection = ReflectionEntry.from_json(body["reflection"])
            except (KeyError, TypeError) as exc:
                raise ApiFault(400, "MalformedRequest", f"reflection is malformed: {exc}") from exc
        suggestion = None
        if body.get("suggestion") is not None:
            try:
                suggestion = ThreeStepSuggestion.from_json(body["suggestion"])
            except (KeyError, ValueError, TypeError) as exc:
                raise ApiFault(400, "MalformedRequest", f"suggestion is malformed: {exc}") from exc
        timestamp = None
        if body.get("timestamp") is not None:
            try:
                timestamp = parse_timestamp(str(body["timestamp"]))
            except ValueError as exc:
                raise ApiFault(400, "MalformedRequest", f"timestamp is malformed: {exc}") from exc

        record = make_record(
            confirmed,
            detected_emotion=detected,
            reflection=reflection,
            suggestion=suggestion,
            timestamp=timestamp,
            record_id=str(body["id"]) if body.get("id") else None,
        )
        if "was_corrected" in body and bool(body["was_corrected"]) != record.was_corrected:
            raise ApiFault(400, "MalformedRequest",
                           "was_corrected is inconsistent with detected/confirmed labels")
        violations = validate_record(record)
        if violations:
            raise ApiFault(400, "InvalidRecord", "; ".join(violations))
        return record

    @app.get("/api/sessions")
    def list_sessions(request: Request):
        params = request.query_params
        today = datetime.combine(utc_now().date(), dtime.min, tzinfo=timezone.utc)
        start = _parse_instant(params["from"], "from") if "from" in params else today
        end = _parse_instant(params["to"], "to") if "to" in params else today + timedelta(days=1)
        records = store.list_records(start, end)
        return {"records": [r.to_json() for r in records]}

    @app.delete("/api/sessions/{record_id}")
    def delete_session(record_id: str):
        with write_lock:
            deleted = store.delete_record(record_id)
        if not deleted:
            return _error_response(404, "RecordNotFound", "no record with that id")
        return Response(status_code=204)

    @app.get("/api/reports/daily")
    def daily_report(request: Request):
        text = request.query_params.get("date")
        try:
            day = date.fromisoformat(text) if text else utc_now().date()
        except ValueError:
            raise ApiFault(400, "MalformedRequest", "date must look like YYYY-MM-DD") from None
        return build_daily_report(store, day).to_json()

    @app.get("/api/reports/weekly")
    def weekly_report(request: Request):
        text = request.query_params.get("week")
        try:
            if text:
                year, week = parse_iso_week(text)
            else:
                iso = utc_now().isocalendar()
                year, week = iso.year, iso.week
        except ValueError:
            raise ApiFault(400, "MalformedRequest", "week must look like 2025-W03") from None
        return build_weekly_report(store, year, week).to_json()

    @app.get("/api/media/{media_id}")
    def fetch_media(media_id: str):
        payload = components.media.fetch_once(media_id)
        if payload is None:
            return _error_response(404, "MediaNotFound", "no media with that id (already served?)")
        return Response(content=payload, media_type="audio/wav")

    @app.post("/api/maintenance/cleanup")
    async def maintenance_cleanup(request: Request):
        body: dict = {}
        if (await request.body()):
            body = await _json_body(request)
        max_age = timedelta(seconds=float(body.get("max_age_s", 0)))
        components.media.sweep()
        result = store.cleanup_temp(max_age)
        return {"removed": result.removed, "failures": result.failures}

    if components.static_dir is not None and Path(components.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(components.static_dir), html=True), name="ui")

    return app


def default_components(root: Path | str = "mindmirror-data") -> AppComponents:
    """Minimal local wiring: stub classifier, default Ollama client, no speech."""
    store = SessionStore(root)
    return AppComponents(
        store=store,
        backend=StubClassifier(),
        llm_client=OllamaChatClient(LlmClientConfig.from_env()),
    )


def start_temp_sweeper(components: AppComponents, interval_s: float = 600.0,
                       max_age_s: float = 600.0) -> threading.Event:
    """Background safety net: periodically drop aged temp files and stale
    media entries. Handlers already clean up after themselves; this catches
    anything a crashed client never fetched. Returns a stop event."""
    stop = threading.Event()

    def sweep_loop():
        while not stop.wait(interval_s):
            components.media.sweep()
            components.store.cleanup_temp(timedelta(seconds=max_age_s))

    threading.Thread(target=sweep_loop, name="temp-sweeper", daemon=True).start()
    return stop
