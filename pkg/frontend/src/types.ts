export interface ScoreRow {
  tool: string;
  semantic: number;
  pattern: number;
  combined: number;
}

export interface GroundingSummary {
  tool: string;
  confidence: number;
  tool_bypassed: boolean;
  scores: ScoreRow[];
}

export interface ChatTurnPayload {
  session_id: string;
  user_text: string;
  route: 'tool' | 'direct';
  answer_text: string;
  grounding: GroundingSummary | null;
  overridden: boolean;
}

export interface ToolInfo {
  name: string;
  description: string;
  kind: string;
}

export interface ToolBadge {
  name: string;
  confidence: number;
}

/** One rendered turn: everything the transcript view needs. */
export interface TurnView {
  userText: string;
  answerText: string;
  route: 'tool' | 'direct';
  toolBadge: ToolBadge | null;
  /** Per-tool rows sorted by combined score, highest first. */
  scoreBreakdown: ScoreRow[];
  overridden: boolean;
}

export interface SessionState {
  sessionId: string;
  turns: TurnView[];
  busy: boolean;
  error: string | null;
}
