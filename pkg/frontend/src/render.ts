import type { SessionState, ToolInfo, TurnView } from './types';

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function renderBreakdown(view: TurnView): string {
  if (view.scoreBreakdown.length === 0) {
    return '';
  }
  const rows = view.scoreBreakdown
    .map(
      (row) => `<tr>
        <td>${escapeHtml(row.tool)}</td>
        <td>${row.semantic.toFixed(4)}</td>
        <td>${row.pattern.toFixed(4)}</td>
        <td>${row.combined.toFixed(4)}</td>
      </tr>`,
    )
    .join('');
  return `<details class="breakdown">
    <summary>score breakdown</summary>
    <table>
      <thead><tr><th>tool</th><th>semantic</th><th>pattern</th><th>combined</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </details>`;
}

export function renderTurn(view: TurnView, index: number): string {
  const badge = view.toolBadge
    ? `<span class="badge" data-tool="${escapeHtml(view.toolBadge.name)}">
        ${escapeHtml(view.toolBadge.name)}
        <span class="confidence">${view.toolBadge.confidence.toFixed(6)}</span>
      </span>${view.overridden ? '<span class="override-mark">overridden</span>' : ''}`
    : '<span class="badge badge-direct">direct</span>';
  return `<section class="turn" data-index="${index}">
    <div class="user">${escapeHtml(view.userText)}</div>
    <div class="answer">${badge}
      <span class="answer-text">${escapeHtml(view.answerText)}</span>
      ${view.toolBadge ? `<button class="override-btn" data-index="${index}">use another tool</button>` : ''}
    </div>
    ${renderBreakdown(view)}
  </section>`;
}

export function renderChat(state: SessionState): string {
  const turns = state.turns.map(renderTurn).join('\n');
  const banner = state.error
    ? `<div class="error-banner">
        ${escapeHtml(state.error)}
        <button class="retry-btn">retry</button>
      </div>`
    : '';
  return `${banner}<div class="transcript">${turns}</div>`;
}

export function renderToolLibrary(tools: ToolInfo[]): string {
  const items = tools
    .map(
      (tool) => `<li class="tool" data-tool="${escapeHtml(tool.name)}">
        <strong>${escapeHtml(tool.name)}</strong>
        <span class="kind">${escapeHtml(tool.kind)}</span>
        <p>${escapeHtml(tool.description)}</p>
      </li>`,
    )
    .join('');
  return `<ul class="tool-library">${items}</ul>`;
}
