// Mirrors of the backend JSON contract. The backend is authoritative;
// nothing here adds semantics of its own.

export const LABELS = [
  "angry",
  "disgust",
  "fear",
  "happy",
  "neutral",
  "sad",
  "surprise",
] as const;

export type EmotionLabel = (typeof LABELS)[number];

export interface EmotionPrediction {
  label: EmotionLabel;
  scores: Record<EmotionLabel, number>;
  model_id: string;
}

export interface ReflectionEntry {
  blockage: string;
  tried: string;
  goal: string;
}

export type StepKind = "immediate" | "short_term" | "longer_term";

export interface SuggestionStep {
  kind: StepKind;
  action: string;
  explanation: string;
}

export interface ThreeStepSuggestion {
  steps: SuggestionStep[];
  raw_text: string;
}

export interface SessionRecord {
  id: string;
  timestamp: string;
  confirmed_state: EmotionLabel;
  was_corrected: boolean;
  schema_version: number;
  detected_emotion?: EmotionPrediction;
  reflection?: ReflectionEntry;
  suggestion?: ThreeStepSuggestion;
  [extra: string]: unknown;
}

export interface TrendBucket {
  start: string;
  count: number;
  label?: EmotionLabel;
}

export type ReportPeriod =
  | { kind: "daily"; date: string }
  | { kind: "weekly"; week: string };

export interface ReviewReport {
  period: ReportPeriod;
  state_distribution: Record<EmotionLabel, number>;
  trend: TrendBucket[];
  blockage_summaries: string[];
  suggestion_summaries: string[];
  next_steps: string[];
  total_checks: number;
}

export interface SpeechInfo {
  configured: boolean;
  external: boolean;
}

export interface HealthInfo {
  status: string;
  model_loaded: boolean;
  llm_reachable: boolean;
  routes: string[];
  speech: SpeechInfo;
}

export interface ChatReflectRequest {
  mode: "reflect";
  confirmed_state: EmotionLabel;
  detected_emotion?: EmotionPrediction;
  reflection: ReflectionEntry;
}

export interface ChatReflectResponse {
  record_id: string;
  fallback: boolean;
  suggestion?: ThreeStepSuggestion;
  raw_reply?: string;
  parse_failed?: boolean;
  message?: string;
}

export interface VoiceChatResponse {
  reply_text: string;
  transcript: string;
  fallback: boolean;
  trace: {
    capture_ms: number;
    asr_ms: number;
    llm_ms: number;
    tts_ms: number;
    total_ms: number;
  };
  reply_audio_id?: string;
}

export interface NewSessionRequest {
  confirmed_state: EmotionLabel;
  detected_emotion?: EmotionPrediction;
  reflection?: ReflectionEntry;
  timestamp?: string;
}
