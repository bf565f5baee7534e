import type { ChatTurnPayload, SessionState, TurnView } from './types';

/**
 * Convert a service turn into its view model. The badge and breakdown are
 * copied verbatim from the API; the only client-side work is sorting the
 * breakdown by combined score (descending) for display. The badge always
 * names the tool the service executed, which equals the top breakdown row
 * unless the turn was overridden.
 */
export function toTurnView(turn: ChatTurnPayload): TurnView {
  const grounding = turn.grounding;
  return {
    userText: turn.user_text,
    answerText: turn.answer_text,
    route: turn.route,
    toolBadge: grounding ? { name: grounding.tool, confidence: grounding.confidence } : null,
    scoreBreakdown: grounding
      ? [...grounding.scores].sort((a, b) => b.combined - a.combined)
      : [],
    overridden: turn.overridden,
  };
}

export function newSession(sessionId: string): SessionState {
  return { sessionId, turns: [], busy: false, error: null };
}

export function applyTurn(state: SessionState, turn: ChatTurnPayload): SessionState {
  return {
    ...state,
    turns: [...state.turns, toTurnView(turn)],
    busy: false,
    error: null,
  };
}

export function applyError(state: SessionState, message: string): SessionState {
  return { ...state, busy: false, error: message };
}

/** Rebuild the whole view from the service transcript (refresh-safe). */
export function fromTranscript(sessionId: string, turns: ChatTurnPayload[]): SessionState {
  return {
    sessionId,
    turns: turns.map(toTurnView),
    busy: false,
    error: null,
  };
}
