import { escapeHtml } from './html';
import type { AnswerResponse, QuizItem, Session } from './types';

export function badgesFor(item: QuizItem): string[] {
  const badges: string[] = [];
  if (item.was_new) badges.push('new');
  if (item.question.marked_source) badges.push('star');
  return badges;
}

function renderBadges(item: QuizItem): string {
  return badgesFor(item)
    .map((badge) =>
      badge === 'new'
        ? '<span class="badge badge-new">new!</span>'
        : '<span class="badge badge-star">★</span>',
    )
    .join('');
}

export function renderProgressBar(session: Session): string {
  const percent = Math.round(session.progress * 100);
  return (
    `<div class="progress-bar" role="progressbar" aria-valuenow="${percent}" ` +
    `aria-valuemin="0" aria-valuemax="100"><div class="fill" style="width:${percent}%"></div></div>`
  );
}

// The current question: badges, optional task hint above the stem, one
// button per option. Options are disabled while a submission is in flight.
export function renderQuestionCard(item: QuizItem, session: Session, pending: boolean): string {
  const hint = item.question.context_hint
    ? `<p class="context-hint">${escapeHtml(item.question.context_hint)}</p>`
    : '';
  const options = item.question.options
    .map(
      (option, index) =>
        `<button type="button" class="option" data-action="answer" data-option-index="${index}"` +
        `${pending ? ' disabled' : ''}>${escapeHtml(option)}</button>`,
    )
    .join('');
  return [
    `<div class="question-card" data-question-id="${escapeHtml(item.question.id)}">`,
    `<header>${renderBadges(item)}</header>`,
    hint,
    `<p class="stem">${escapeHtml(item.question.stem)}</p>`,
    `<div class="options">${options}</div>`,
    renderProgressBar(session),
    '</div>',
  ].join('');
}

// Post-submission view: verdict and explanation, then an explicit advance.
export function renderFeedback(item: QuizItem, result: AnswerResponse): string {
  const verdict = result.correct
    ? '<p class="verdict correct">Correct!</p>'
    : '<p class="verdict incorrect">Not quite.</p>';
  const key = item.question.options[result.key_index];
  return [
    '<div class="feedback-card">',
    verdict,
    `<p class="answer-key">Answer: ${escapeHtml(key ?? '')}</p>`,
    `<p class="explanation">${escapeHtml(result.explanation)}</p>`,
    result.correct ? '' : '<p class="requeue-note">This one will come back later in the quiz.</p>',
    `<button type="button" data-action="advance">Continue</button>`,
    renderProgressBar(result.session),
    '</div>',
  ].join('');
}

export function renderCompletion(session: Session): string {
  return [
    '<div class="completion-card">',
    `<h3>Quiz complete!</h3>`,
    `<p>You solved all ${session.solved.length} questions.</p>`,
    '<button type="button" data-action="new-quiz">Start another quiz</button>',
    '<button type="button" data-action="show-dashboard">Back to dashboard</button>',
    '</div>',
  ].join('');
}
