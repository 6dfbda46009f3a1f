import { escapeHtml } from './html';
import type { DashboardStats } from './types';

export interface DashboardRenderOptions {
  startDisabled?: boolean;
  guidance?: string;
}

export function renderDashboard(
  stats: DashboardStats,
  options: DashboardRenderOptions = {},
): string {
  const disabled = options.startDisabled ? ' disabled' : '';
  const guidance = options.guidance
    ? `<p class="guidance">${escapeHtml(options.guidance)}</p>`
    : '';
  return [
    '<div class="dashboard">',
    '<div class="counters">',
    `<div class="counter"><span class="value">${stats.quizzes_today}</span><span class="label">quizzes today</span></div>`,
    `<div class="counter"><span class="value">${stats.quizzes_total}</span><span class="label">quizzes total</span></div>`,
    `<div class="counter"><span class="value">${stats.new_questions_available}</span><span class="label">new questions</span></div>`,
    '</div>',
    `<button type="button" class="start-quiz" data-action="start-quiz"${disabled}>Start Quiz</button>`,
    guidance,
    '</div>',
  ].join('');
}

export const NO_QUESTIONS_GUIDANCE =
  'No questions yet. Ask the assistant about words or phrases first; questions are generated from your queries.';
