import { escapeHtml } from './html';
import { diffWords } from './wordDiff';
import type {
  ChatMessage,
  DictionaryPayload,
  QueryIntent,
  RefinementPayload,
  ResponsePayload,
  TextPayload,
  Thread,
  TranslationPayload,
} from './types';

// Each payload type gets its own layout so the transcript reads like the
// assistant answered in the right format, not like raw JSON.

function renderList(items: string[], className: string): string {
  if (items.length === 0) return '';
  const lis = items.map((item) => `<li>${escapeHtml(item)}</li>`).join('');
  return `<ul class="${className}">${lis}</ul>`;
}

export function renderDictionary(payload: DictionaryPayload): string {
  return [
    '<div class="payload dictionary-card">',
    `<h3 class="headword">${escapeHtml(payload.headword)}</h3>`,
    renderList(payload.meanings, 'meanings'),
    payload.synonyms.length
      ? `<p class="synonyms">Synonyms: ${escapeHtml(payload.synonyms.join(', '))}</p>`
      : '',
    renderList(payload.example_sentences, 'examples'),
    '</div>',
  ].join('');
}

// Original and translation stay simultaneously visible, side by side.
export function renderTranslation(payload: TranslationPayload): string {
  return [
    '<div class="payload translation-card">',
    '<div class="translation-columns">',
    `<div class="column original"><h4>Original</h4><p>${escapeHtml(payload.original)}</p></div>`,
    `<div class="column translated"><h4>Translation</h4><p>${escapeHtml(payload.translated)}</p></div>`,
    '</div>',
    payload.explanation
      ? `<p class="explanation">${escapeHtml(payload.explanation)}</p>`
      : '',
    '</div>',
  ].join('');
}

export function renderTrackChanges(original: string, refined: string): string {
  const parts = diffWords(original, refined).map((token) => {
    const text = escapeHtml(token.text);
    if (token.type === 'removed') return `<del>${text}</del>`;
    if (token.type === 'added') return `<ins>${text}</ins>`;
    return text;
  });
  return `<p class="track-changes">${parts.join(' ')}</p>`;
}

export function renderRefinement(payload: RefinementPayload, showDiff: boolean): string {
  const body = showDiff
    ? renderTrackChanges(payload.original, payload.refined)
    : `<p class="refined-text">${escapeHtml(payload.refined)}</p>`;
  return [
    '<div class="payload refinement-card">',
    body,
    `<button type="button" class="diff-toggle" data-action="toggle-diff" aria-pressed="${showDiff}">`,
    'Track changes</button>',
    payload.rationale ? `<p class="rationale">${escapeHtml(payload.rationale)}</p>` : '',
    '</div>',
  ].join('');
}

export function renderText(payload: TextPayload): string {
  return `<div class="payload text-card"><p>${escapeHtml(payload.body)}</p></div>`;
}

export function renderPayload(payload: ResponsePayload, showDiff: boolean): string {
  switch (payload.type) {
    case 'dictionary':
      return renderDictionary(payload);
    case 'translation':
      return renderTranslation(payload);
    case 'refinement':
      return renderRefinement(payload, showDiff);
    case 'text':
      return renderText(payload);
  }
}

export interface ChatRenderOptions {
  // Message ids whose refinement diff toggle is currently on.
  diffOpen?: ReadonlySet<string>;
}

export function renderMessage(message: ChatMessage, options: ChatRenderOptions = {}): string {
  const showDiff = options.diffOpen?.has(message.id) ?? false;
  const star =
    message.author === 'assistant'
      ? `<button type="button" class="star-toggle" data-action="toggle-mark" ` +
        `data-message-id="${escapeHtml(message.id)}" aria-pressed="${message.marked}">` +
        `${message.marked ? '★' : '☆'}</button>`
      : '';
  const body = message.payload
    ? renderPayload(message.payload, showDiff)
    : `<p class="plain-text">${escapeHtml(message.text)}</p>`;
  return [
    `<article class="chat-message ${message.author}" data-message-id="${escapeHtml(message.id)}">`,
    `<header><span class="author">${message.author}</span>${star}</header>`,
    body,
    '</article>',
  ].join('');
}

export function renderThread(thread: Thread, options: ChatRenderOptions = {}): string {
  const messages = thread.messages.map((m) => renderMessage(m, options)).join('\n');
  return `<section class="transcript" data-thread-id="${escapeHtml(thread.id)}">\n${messages}\n</section>`;
}

const INTENTS: Array<{ intent: QueryIntent; label: string }> = [
  { intent: 'lookup', label: 'Word lookup' },
  { intent: 'translation', label: 'Translate' },
  { intent: 'proofread', label: 'Proofread' },
  { intent: 'text', label: 'Ask anything' },
];

// Composer with one button per query intent; a paste-context field stands
// in for screenshot capture.
export function renderComposer(selected: QueryIntent): string {
  const buttons = INTENTS.map(
    ({ intent, label }) =>
      `<button type="button" class="intent-button" data-action="pick-intent" ` +
      `data-intent="${intent}" aria-pressed="${intent === selected}">${label}</button>`,
  ).join('');
  return [
    '<form class="composer" data-role="composer">',
    `<div class="intent-buttons">${buttons}</div>`,
    '<textarea name="text" placeholder="Type your question"></textarea>',
    '<details class="context-fields"><summary>Add task context</summary>',
    '<textarea name="surrounding_text" placeholder="Paste the surrounding text"></textarea>',
    '<input name="task_description" placeholder="What are you working on?">',
    '</details>',
    '<button type="submit" data-action="send">Send</button>',
    '</form>',
  ].join('');
}

// Failures show inline under the transcript; the transcript itself stays.
export function renderErrorBanner(code: string, message: string): string {
  return `<div class="error-banner" data-code="${escapeHtml(code)}">${escapeHtml(message)}</div>`;
}
