// English default string table. The workflow is language-independent;
// swap this table to localize without touching page code.

export const STRINGS = {
  appTitle: "MindMirror",
  navDashboard: "Dashboard",
  navStateCheck: "State check",
  navReflection: "Reflection",
  navReports: "Reports",
  navHistory: "History",

  privacyNotice:
    "Camera frames are analyzed locally and are not stored. The recognized " +
    "label is only a suggestion - you decide what gets saved, and you can " +
    "delete any record at any time.",
  disclaimer:
    "This system provides general emotional support and productivity-oriented " +
    "suggestions, but it cannot replace professional psychological counseling " +
    "or medical services. If you experience persistent or severe distress, " +
    "please seek professional help.",
  externalSpeechBanner:
    "Voice features are using an external speech service; audio you record " +
    "is sent to that service for processing.",

  startCamera: "Start camera",
  captureAnalyze: "Capture & analyze",
  cameraUnavailable: "Camera unavailable - pick your state manually below.",
  detectedAs: "Model cue (editable)",
  yourState: "Your current state",
  saveState: "Save state",
  continueReflection: "Continue to reflection",
  stateSaved: "Saved.",

  qBlockage: "Where am I stuck?",
  qTried: "What have I tried?",
  qGoal: "What do I want to achieve next?",
  submitReflection: "Get a 3-step suggestion",
  blockageRequired: "Please describe where you are stuck.",
  goalRequired: "Please describe what you want to achieve next.",
  fallbackTitle: "Assistant offline",
  rawReplyTitle: "Unstructured reply (kept as-is)",

  daily: "Daily",
  weekly: "Weekly",
  loadReport: "Load report",
  emptyReport: "No check-ins in this period yet. Record a state check to see charts here.",
  distributionTitle: "State distribution",
  trendTitle: "State trend",
  blockagesTitle: "Typical blockages",
  suggestionsTitle: "Suggestion summaries",
  nextStepsTitle: "Next-step reminders",
  totalChecks: "check-ins",

  historyEmpty: "No records in the last 7 days.",
  deleteRecord: "Delete",
  confirmDelete: "Delete this record permanently?",
  corrected: "corrected",

  todayTitle: "Today",
  voiceHold: "Hold to talk",
  voiceHint: "Voice is an optional shortcut; text reflection is the primary path.",
} as const;

export type Strings = typeof STRINGS;
