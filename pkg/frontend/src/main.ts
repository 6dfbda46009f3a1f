import { ApiClient, ApiFailure, FetchHttp } from './api';
import { renderComposer } from './chatView';
import { NO_QUESTIONS_GUIDANCE, renderDashboard } from './dashboardView';
import { ChatFlow, DashboardModel, QuizFlow, initialViewState } from './state';
import type { ViewState } from './state';
import type { QueryIntent } from './types';

// Browser bootstrap. All rendering is done by the pure view functions;
// this file only moves strings into the DOM and routes click events.

function requireElement(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id}`);
  return element;
}

export function startApp(): void {
  const params = new URLSearchParams(window.location.search);
  const token =
    params.get('token') ?? window.localStorage.getItem('workquiz_token') ?? 'dev-token';
  window.localStorage.setItem('workquiz_token', token);
  const client = new ApiClient(new FetchHttp(params.get('api') ?? '', token));

  const root = requireElement('app');
  const state: ViewState = initialViewState();
  let chat: ChatFlow | null = null;
  let quiz: QuizFlow | null = null;
  let dashboard: DashboardModel | null = null;
  let startDisabled = false;
  let guidance = '';

  function paint(): void {
    if (state.view === 'chat' && chat) {
      root.innerHTML = chat.render() + renderComposer(chat.intent);
    } else if (state.view === 'quiz' && quiz) {
      root.innerHTML = quiz.render();
    } else if (dashboard) {
      root.innerHTML = renderDashboard(dashboard.stats, { startDisabled, guidance });
    }
  }

  async function showDashboard(): Promise<void> {
    dashboard = new DashboardModel(await client.dashboard());
    state.view = 'dashboard';
    paint();
  }

  async function startQuiz(): Promise<void> {
    try {
      quiz = new QuizFlow(client, await client.createQuiz());
      state.view = 'quiz';
      state.sessionId = quiz.session.id;
      guidance = '';
      startDisabled = false;
    } catch (failure) {
      if (failure instanceof ApiFailure && failure.code === 'no_questions') {
        startDisabled = true;
        guidance = NO_QUESTIONS_GUIDANCE;
      } else {
        guidance = failure instanceof Error ? failure.message : String(failure);
      }
    }
    paint();
  }

  async function openChat(): Promise<void> {
    const { threads } = await client.listThreads();
    const thread = threads[0] ?? (await client.createThread('practice'));
    chat = new ChatFlow(client, await client.getThread(thread.id));
    state.view = 'chat';
    state.threadId = thread.id;
    paint();
  }

  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>('[data-action]');
    if (!target) return;
    const action = target.dataset['action'];
    if (action === 'start-quiz') void startQuiz();
    else if (action === 'new-quiz') {
      dashboard?.applyCompletion();
      void startQuiz();
    } else if (action === 'show-dashboard') {
      if (quiz?.completed) dashboard?.applyCompletion();
      void showDashboard();
    } else if (action === 'answer' && quiz) {
      const index = Number(target.dataset['optionIndex']);
      void quiz.submit(index).then(paint);
      paint(); // repaint immediately so the options disable while in flight
    } else if (action === 'advance' && quiz) {
      quiz.advance();
      paint();
    } else if (action === 'toggle-mark' && chat) {
      const id = target.dataset['messageId'];
      if (id) void chat.toggleMark(id).then(paint);
    } else if (action === 'toggle-diff' && chat) {
      const article = target.closest<HTMLElement>('[data-message-id]');
      const id = article?.dataset['messageId'];
      if (id) {
        chat.toggleDiff(id);
        paint();
      }
    } else if (action === 'pick-intent' && chat) {
      chat.intent = (target.dataset['intent'] ?? 'text') as QueryIntent;
      paint();
    } else if (action === 'open-chat') {
      void openChat();
    }
  });

  root.addEventListener('submit', (event) => {
    event.preventDefault();
    if (!chat) return;
    const form = event.target as HTMLFormElement;
    const text = (form.elements.namedItem('text') as HTMLTextAreaElement).value.trim();
    if (!text) return;
    const surrounding = (
      form.elements.namedItem('surrounding_text') as HTMLTextAreaElement
    ).value.trim();
    const task = (form.elements.namedItem('task_description') as HTMLInputElement).value.trim();
    const context =
      surrounding && task
        ? { surrounding_text: surrounding, task_description: task }
        : undefined;
    void chat.send(text, context).then(paint);
  });

  void showDashboard();
}
