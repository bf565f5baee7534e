import { GearClient } from './api';
import { renderChat, renderToolLibrary } from './render';
import { applyError, applyTurn, fromTranscript, newSession } from './state';
import type { SessionState } from './types';

const POLL_INTERVAL_MS = 4000;

function sessionIdFromLocation(): string {
  const params = new URLSearchParams(window.location.search);
  const existing = params.get('session');
  if (existing) {
    return existing;
  }
  const fresh = `web-${Math.random().toString(36).slice(2, 10)}`;
  params.set('session', fresh);
  window.history.replaceState(null, '', `?${params.toString()}`);
  return fresh;
}

export function mount(root: HTMLElement, baseUrl: string): void {
  const client = new GearClient(baseUrl);
  let state: SessionState = newSession(sessionIdFromLocation());
  let lastText = '';

  root.innerHTML = `
    <main class="gear-chat">
      <header>
        <h1>gear chat</h1>
        <button id="toggle-library">tool library</button>
      </header>
      <div id="library" hidden></div>
      <div id="chat"></div>
      <form id="composer">
        <input id="message" type="text" placeholder="Ask something..." autocomplete="off" />
        <button id="send" type="submit">send</button>
      </form>
    </main>`;

  const chatEl = root.querySelector<HTMLElement>('#chat')!;
  const libraryEl = root.querySelector<HTMLElement>('#library')!;
  const messageEl = root.querySelector<HTMLInputElement>('#message')!;
  const sendEl = root.querySelector<HTMLButtonElement>('#send')!;

  function redraw(): void {
    chatEl.innerHTML = renderChat(state);
    messageEl.disabled = state.busy;
    sendEl.disabled = state.busy;
    chatEl.querySelectorAll<HTMLButtonElement>('.override-btn').forEach((btn) => {
      btn.addEventListener('click', () => {
        const index = Number(btn.dataset.index);
        const tool = window.prompt('Tool to use instead:');
        if (tool) {
          void overrideTurn(index, tool);
        }
      });
    });
    chatEl.querySelector<HTMLButtonElement>('.retry-btn')?.addEventListener('click', () => {
      if (lastText) {
        void send(lastText);
      }
    });
  }

  async function send(text: string, toolOverride?: string): Promise<void> {
    if (state.busy) {
      return;
    }
    state = { ...state, busy: true, error: null };
    lastText = text;
    redraw();
    try {
      const turn = await client.chat(state.sessionId, text, toolOverride);
      state = applyTurn(state, turn);
    } catch (err) {
      state = applyError(state, err instanceof Error ? err.message : String(err));
    }
    redraw();
  }

  async function overrideTurn(index: number, tool: string): Promise<void> {
    const turn = state.turns[index];
    if (turn) {
      await send(turn.userText, tool);
    }
  }

  async function refreshFromServer(): Promise<void> {
    if (state.busy) {
      return;
    }
    try {
      const turns = await client.transcript(state.sessionId);
      if (turns.length !== state.turns.length) {
        state = fromTranscript(state.sessionId, turns);
        redraw();
      }
    } catch {
      // Polling errors are transient; the next send surfaces a banner.
    }
  }

  root.querySelector<HTMLFormElement>('#composer')!.addEventListener('submit', (event) => {
    event.preventDefault();
    const text = messageEl.value.trim();
    if (text) {
      messageEl.value = '';
      void send(text);
    }
  });

  root.querySelector<HTMLButtonElement>('#toggle-library')!.addEventListener('click', () => {
    if (libraryEl.hidden) {
      void client.tools().then((tools) => {
        libraryEl.innerHTML = renderToolLibrary(tools);
        libraryEl.hidden = false;
      });
    } else {
      libraryEl.hidden = true;
    }
  });

  void refreshFromServer();
  window.setInterval(() => void refreshFromServer(), POLL_INTERVAL_MS);
  redraw();
}

declare global {
  interface Window {
    GEAR_BASE_URL?: string;
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  mount(document.getElementById('app')!, window.GEAR_BASE_URL ?? 'http://127.0.0.1:8080');
}
