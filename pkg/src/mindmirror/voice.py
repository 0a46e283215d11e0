"""Optional speech path: audio conversion, STT -> LLM -> TTS, stage timing.

Voice is an auxiliary chat path, not structured reflection: the transcript
goes to the LLM as free-form user content under the same safety rules. STT
and TTS are pluggable adapters with deterministic stubs; external HTTP
adapters are flagged so the UI can disclose third-party processing. Every
request records a four-stage latency trace whose total is, by
construction, the exact sum of the stages.

The environment may lack a WebM/Opus decoder entirely; conversion degrades
to UnsupportedCodec for such containers unless an ffmpeg binary is
available, while WAV input is always normalized natively.
"""

from __future__ import annotations

import hashlib
import io
import math
import shutil
import struct
import subprocess
import time
import wave
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Protocol

import numpy as np

from .llm import (
    DEFAULT_TEMPLATE,
    FALLBACK_MESSAGE,
    FallbackUnavailable,
    MalformedRuntimeReply,
    PromptTemplate,
    voice_system_text,
)
from .store import MediaVault

TARGET_RATE = 16000

_RIFF_MAGIC = b"RIFF"
_WAVE_MAGIC = b"WAVE"
_EBML_MAGIC = b"\x1a\x45\xdf\xa3"  # WebM / Matroska container
_OGG_MAGIC = b"OggS"


class VoiceError(Exception):
    pass


class CorruptContainer(VoiceError):
    pass


class UnsupportedCodec(VoiceError):
    pass


class SttUnavailable(VoiceError):
    pass


class TtsUnavailable(VoiceError):
    pass


@dataclass(frozen=True)
class LatencyTrace:
    """Per-request stage timings in milliseconds; total is the exact stage sum."""

    capture_ms: float
    asr_ms: float
    llm_ms: float
    tts_ms: float
    total_ms: float

    def __post_init__(self):
        stages = (self.capture_ms, self.asr_ms, self.llm_ms, self.tts_ms)
        if any(s < 0 for s in stages):
            raise ValueError("stage durations must be non-negative")
        if self.total_ms != sum(stages):
            raise ValueError("total_ms must equal the exact sum of the stages")

    @classmethod
    def from_stages(cls, capture_ms: float, asr_ms: float, llm_ms: float, tts_ms: float) -> "LatencyTrace":
        return cls(capture_ms, asr_ms, llm_ms, tts_ms,
                   capture_ms + asr_ms + llm_ms + tts_ms)

    def to_json(self) -> dict[str, float]:
        return {
            "capture_ms": self.capture_ms,
            "asr_ms": self.asr_ms,
            "llm_ms": self.llm_ms,
            "tts_ms": self.tts_ms,
            "total_ms": self.total_ms,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "LatencyTrace":
        return cls(
            capture_ms=float(data["capture_ms"]),
            asr_ms=float(data["asr_ms"]),
            llm_ms=float(data["llm_ms"]),
            tts_ms=float(data["tts_ms"]),
            total_ms=float(data["total_ms"]),
        )


def write_wav(samples: np.ndarray, rate: int = TARGET_RATE) -> bytes:
    """Pack float samples in [-1, 1] as mono 16-bit PCM WAV bytes."""
    clipped = np.clip(samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as out:
        out.setnchannels(1)
        out.setsampwidth(2)
        out.setframerate(rate)
        out.writeframes(pcm.tobytes())
    return buf.getvalue()


def make_tone_wav(duration_s: float, freq_hz: float = 440.0, rate: int = TARGET_RATE) -> bytes:
    """Deterministic sine clip; used by the TTS stub and as trial fixtures."""
    t = np.arange(int(round(duration_s * rate))) / rate
    return write_wav(0.4 * np.sin(2 * math.pi * freq_hz * t), rate)


def _read_wav(data: bytes) -> tuple[np.ndarray, int]:
    """WAV bytes -> (float64 mono samples in [-1, 1], sample rate)."""
    try:
        with wave.open(io.BytesIO(data), "rb") as src:
            channels = src.getnchannels()
            width = src.getsampwidth()
            rate = src.getframerate()
            frames = src.readframes(src.getnframes())
    except (wave.Error, EOFError, struct.error) as exc:
        raise CorruptContainer(f"unreadable WAV data: {exc}") from exc
    if channels < 1 or rate <= 0:
        raise CorruptContainer("WAV header describes no audio")
    if width == 1:
        samples = (np.frombuffer(frames, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif width == 2:
        samples = np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 4:
        samples = np.frombuffer(frames, dtype="<i4").astype(np.float64) / 2147483648.0
    else:
        raise UnsupportedCodec(f"unsupported WAV sample width: {width * 8} bit")
    if channels > 1:
        samples = samples[: len(samples) - len(samples) % channels]
        samples = samples.reshape(-1, channels).mean(axis=1)
    return samples, rate


def _resample(samples: np.ndarray, rate: int, target: int = TARGET_RATE) -> np.ndarray:
    if rate == target or samples.size == 0:
        return samples
    from scipy.signal import resample_poly

    gcd = math.gcd(target, rate)
    return resample_poly(samples, target // gcd, rate // gcd)


def _ffmpeg_decode(data: bytes, ffmpeg: str) -> bytes:
    cmd = [ffmpeg, "-hide_banner", "-loglevel", "error", "-i", "pipe:0",
           "-f", "wav", "-ac", "1", "-ar", str(TARGET_RATE), "pipe:1"]
    proc = subprocess.run(cmd, input=data, capture_output=True)
    if proc.returncode != 0:
        stderr = proc.stderr.decode(errors="replace")
        if "Invalid data" in stderr:
            raise CorruptContainer(f"decoder rejected input: {stderr.strip()}")
        raise UnsupportedCodec(f"decoder failed: {stderr.strip()}")
    return proc.stdout


def convert_audio(data: bytes, ffmpeg_path: Optional[str] = None) -> bytes:
    """Normalize input audio to mono 16 kHz 16-bit PCM WAV.

    WAV input is handled natively (idempotent for already-normalized
    clips). WebM and Ogg containers need an external decoder; when no
    ffmpeg binary is available they raise UnsupportedCodec.
    """
    if not data:
        raise CorruptContainer("empty audio payload")
    if data[:4] == _RIFF_MAGIC and data[8:12] == _WAVE_MAGIC:
        samples, rate = _read_wav(data)
        return write_wav(_resample(samples, rate))
    if data[:4] in (_EBML_MAGIC, _OGG_MAGIC):
        ffmpeg = ffmpeg_path or shutil.which("ffmpeg")
        if ffmpeg is None:
            kind = "WebM" if data[:4] == _EBML_MAGIC else "Ogg"
            raise UnsupportedCodec(f"no decoder available for {kind} audio")
        decoded = _ffmpeg_decode(data, ffmpeg)
        samples, rate = _read_wav(decoded)
        return write_wav(_resample(samples, rate))
    raise CorruptContainer("unrecognized audio container")


class DelayedConverter:
    """Converter wrapper that injects a fixed capture-stage delay (for trials)."""

    def __init__(self, delay_ms: float, base: Callable[[bytes], bytes] = convert_audio):
        self.delay_ms = delay_ms
        self.base = base

    def __call__(self, data: bytes) -> bytes:
        time.sleep(self.delay_ms / 1000.0)
        return self.base(data)


class SttAdapter(Protocol):
    is_external: bool

    def transcribe(self, wav_bytes: bytes) -> str: ...


class TtsAdapter(Protocol):
    is_external: bool

    def synthesize(self, text: str) -> bytes: ...


def audio_fingerprint(wav_bytes: bytes) -> str:
    return hashlib.sha256(wav_bytes).hexdigest()


class StubStt:
    """Deterministic STT: fixed transcript table keyed by audio fingerprint."""

    is_external = False

    def __init__(self, default: str = "", transcripts: Optional[Mapping[str, str]] = None,
                 delay_ms: float = 0.0, fail: bool = False):
        self.default = default
        self.transcripts = dict(transcripts or {})
        self.delay_ms = delay_ms
        self.fail = fail

    def transcribe(self, wav_bytes: bytes) -> str:
        if self.delay_ms:
            time.sleep(self.delay_ms / 1000.0)
        if self.fail:
            raise SttUnavailable("stub STT configured to fail")
        return self.transcripts.get(audio_fingerprint(wav_bytes), self.default)


class StubTts:
    """Deterministic TTS: always returns the same short tone clip."""

    is_external = False

    def __init__(self, delay_ms: float = 0.0, fail: bool = False, tone_s: float = 0.5):
        self.delay_ms = delay_ms
        self.fail = fail
        self._audio = make_tone_wav(tone_s)

    def synthesize(self, text: str) -> bytes:
        if self.delay_ms:
            time.sleep(self.delay_ms / 1000.0)
        if self.fail:
            raise TtsUnavailable("stub TTS configured to fail")
        return self._audio


class HttpSttAdapter:
    """Client for an external speech-to-text HTTP service.

    POSTs the WAV payload and expects JSON {"text": ...}. Marked external
    so the interface can disclose third-party processing.
    """

    is_external = True

    def __init__(self, url: str, api_key: Optional[str] = None, timeout: float = 30.0):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def transcribe(self, wav_bytes: bytes) -> str:
        import requests

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            response = requests.post(self.url, data=wav_bytes, timeout=self.timeout,
                                     headers={"Content-Type": "audio/wav", **headers})
            response.raise_for_status()
            return str(response.json()["text"])
        except Exception as exc:
            raise SttUnavailable(f"external STT failed: {exc}") from exc


class HttpTtsAdapter:
    """Client for an external text-to-speech HTTP service returning audio bytes."""

    is_external = True

    def __init__(self, url: str, api_key: Optional[str] = None, timeout: float = 30.0):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def synthesize(self, text: str) -> bytes:
        import requests

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            response = requests.post(self.url, json={"text": text}, timeout=self.timeout,
                                     headers=headers)
            response.raise_for_status()
            return response.content
        except Exception as exc:
            raise TtsUnavailable(f"external TTS failed: {exc}") from exc


@dataclass(frozen=True)
class VoiceChatResult:
    reply_text: str
    reply_audio_id: Optional[str]
    trace: LatencyTrace
    transcript: str
    fallback: bool


class VoicePipeline:
    """One pipeline instance per configuration; each call is independent.

    TTS is off unless an adapter is configured. A TTS failure degrades to
    a text-only reply with tts_ms = 0; an STT failure is an error to the
    caller; an LLM outage degrades to the canned fallback message.
    """

    def __init__(
        self,
        llm_client,
        stt: Optional[SttAdapter] = None,
        tts: Optional[TtsAdapter] = None,
        media: Optional[MediaVault] = None,
        converter: Callable[[bytes], bytes] = convert_audio,
        template: PromptTemplate = DEFAULT_TEMPLATE,
    ):
        if tts is not None and media is None:
            raise ValueError("a media vault is required when TTS is configured")
        self.llm_client = llm_client
        self.stt = stt
        self.tts = tts
        self.media = media
        self.converter = converter
        self.system_text = voice_system_text(template)

    @property
    def configured(self) -> bool:
        return self.stt is not None

    @property
    def external(self) -> bool:
        return bool(
            (self.stt is not None and self.stt.is_external)
            or (self.tts is not None and self.tts.is_external)
        )

    def voice_chat(self, audio_bytes: bytes) -> VoiceChatResult:
        if self.stt is None:
            raise SttUnavailable("no speech-to-text adapter configured")

        start = time.perf_counter()
        wav = self.converter(audio_bytes)
        capture_ms = (time.perf_counter() - start) * 1000.0

        start = time.perf_counter()
        transcript = self.stt.transcribe(wav)
        asr_ms = (time.perf_counter() - start) * 1000.0

        fallback = False
        start = time.perf_counter()
        try:
            reply = self.llm_client.chat(self.system_text, transcript)
        except FallbackUnavailable as exc:
            reply = exc.fallback_message
            fallback = True
        except MalformedRuntimeReply:
            reply = FALLBACK_MESSAGE
            fallback = True
        llm_ms = (time.perf_counter() - start) * 1000.0

        tts_ms = 0.0
        audio_id: Optional[str] = None
        if self.tts is not None:
            start = time.perf_counter()
            try:
                reply_audio = self.tts.synthesize(reply)
            except TtsUnavailable:
                tts_ms = 0.0  # degraded: text-only reply
            else:
                tts_ms = (time.perf_counter() - start) * 1000.0
                audio_id = self.media.store(reply_audio)

        return VoiceChatResult(
            reply_text=reply,
            reply_audio_id=audio_id,
            trace=LatencyTrace.from_stages(capture_ms, asr_ms, llm_ms, tts_ms),
            transcript=transcript,
            fallback=fallback,
        )
