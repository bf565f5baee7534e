import type { ChatTurnPayload, ToolInfo } from './types';

/**
 * Thin typed client for the grounding service. All numbers (confidence,
 * score breakdown) are passed through verbatim; no scoring happens here.
 */
export class GearClient {
  constructor(private readonly baseUrl: string) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      const detail = await res.text().catch(() => '');
      throw new Error(`${path} failed with ${res.status}: ${detail}`);
    }
    return (await res.json()) as T;
  }

  private async get<T>(path: string): Promise<T> {
    const res = await fetch(`${this.baseUrl}${path}`);
    if (!res.ok) {
      throw new Error(`${path} failed with ${res.status}`);
    }
    return (await res.json()) as T;
  }

  async chat(sessionId: string, text: string, toolOverride?: string): Promise<ChatTurnPayload> {
    const body: Record<string, unknown> = { session_id: sessionId, text };
    if (toolOverride) {
      body.tool_override = toolOverride;
    }
    return this.post<ChatTurnPayload>('/api/chat', body);
  }

  async ground(query: string): Promise<Record<string, unknown>> {
    return this.post('/api/ground', { query });
  }

  async tools(): Promise<ToolInfo[]> {
    return this.get<ToolInfo[]>('/api/tools');
  }

  async transcript(sessionId: string): Promise<ChatTurnPayload[]> {
    const body = await this.get<{ turns: ChatTurnPayload[] }>(
      `/api/session/${encodeURIComponent(sessionId)}`,
    );
    return body.turns ?? [];
  }
}
