import { ApiClient, ApiFailure } from './api';
import { renderErrorBanner, renderThread } from './chatView';
import { renderCompletion, renderFeedback, renderQuestionCard } from './quizView';
import type {
  AnswerResponse,
  DashboardStats,
  QueryIntent,
  Quiz,
  QuizItem,
  QuizWithSession,
  Session,
  Thread,
} from './types';

export interface ViewState {
  view: 'chat' | 'quiz' | 'dashboard';
  threadId: string | null;
  sessionId: string | null;
  pending: boolean;
}

export function initialViewState(): ViewState {
  return { view: 'dashboard', threadId: null, sessionId: null, pending: false };
}

// ── chat ─────────────────────────────────────────────────────────────────

export class ChatFlow {
  thread: Thread;
  intent: QueryIntent = 'text';
  error: { code: string; message: string } | null = null;
  private readonly diffOpen = new Set<string>();

  constructor(
    private readonly client: ApiClient,
    thread: Thread,
  ) {
    this.thread = thread;
  }

  toggleDiff(messageId: string): void {
    if (this.diffOpen.has(messageId)) this.diffOpen.delete(messageId);
    else this.diffOpen.add(messageId);
  }

  // Mark toggles are optimistic: flip locally, roll back if the API says no.
  async toggleMark(messageId: string): Promise<void> {
    const message = this.thread.messages.find((m) => m.id === messageId);
    if (!message || message.author !== 'assistant') return;
    const next = !message.marked;
    message.marked = next;
    try {
      await this.client.markMessage(messageId, next);
    } catch (failure) {
      message.marked = !next;
      this.recordFailure(failure);
    }
  }

  async send(text: string, context?: { surrounding_text: string; task_description: string }): Promise<void> {
    try {
      const exchange = await this.client.postMessage(this.thread.id, {
        text,
        ...(this.intent === 'text' ? {} : { intent: this.intent }),
        ...(context ? { context } : {}),
      });
      this.thread.messages.push(exchange.user_message, exchange.assistant_message);
      this.error = null;
    } catch (failure) {
      this.recordFailure(failure);
    }
  }

  private recordFailure(failure: unknown): void {
    this.error =
      failure instanceof ApiFailure
        ? { code: failure.code, message: failure.message }
        : { code: 'invalid_output', message: String(failure) };
  }

  // The transcript always renders; a failure only appends a banner.
  render(): string {
    const transcript = renderThread(this.thread, { diffOpen: this.diffOpen });
    const banner = this.error ? renderErrorBanner(this.error.code, this.error.message) : '';
    return transcript + banner;
  }
}

// ── quiz ─────────────────────────────────────────────────────────────────

type QuizPhase =
  | { kind: 'question' }
  | { kind: 'feedback'; item: QuizItem; result: AnswerResponse }
  | { kind: 'completed' };

export type SubmitOutcome = 'graded' | 'conflict' | 'ignored';

export class QuizFlow {
  quiz: Quiz;
  session: Session;
  private phase: QuizPhase = { kind: 'question' };
  private inFlight = false;

  constructor(
    private readonly client: ApiClient,
    state: QuizWithSession,
  ) {
    if (!state.session) throw new Error('quiz has no session to play');
    this.quiz = state.quiz;
    this.session = state.session;
    if (this.session.state === 'completed') this.phase = { kind: 'completed' };
  }

  get submitting(): boolean {
    return this.inFlight;
  }

  currentItem(): QuizItem {
    const questionId = this.session.queue[0];
    const item = this.quiz.items.find((i) => i.question.id === questionId);
    if (!item) throw new Error(`question ${questionId} not in quiz`);
    return item;
  }

  // At most one submission may be in flight per session; extra clicks are
  // ignored rather than queued.
  async submit(optionIndex: number): Promise<SubmitOutcome> {
    if (this.inFlight || this.phase.kind !== 'question') return 'ignored';
    const item = this.currentItem();
    this.inFlight = true;
    try {
      const result = await this.client.submitAnswer(
        this.quiz.id,
        item.question.id,
        optionIndex,
        this.session.version,
      );
      this.session = result.session;
      this.phase = { kind: 'feedback', item, result };
      return 'graded';
    } catch (failure) {
      if (failure instanceof ApiFailure && failure.code === 'version_conflict') {
        // Another tab moved the session: reload its truth and re-render.
        const fresh = await this.client.getQuiz(this.quiz.id);
        if (fresh.session) this.session = fresh.session;
        this.phase =
          this.session.state === 'completed' ? { kind: 'completed' } : { kind: 'question' };
        return 'conflict';
      }
      throw failure;
    } finally {
      this.inFlight = false;
    }
  }

  advance(): void {
    if (this.phase.kind !== 'feedback') return;
    this.phase = this.session.state === 'completed' ? { kind: 'completed' } : { kind: 'question' };
  }

  get completed(): boolean {
    return this.phase.kind === 'completed';
  }

  render(): string {
    switch (this.phase.kind) {
      case 'question':
        return renderQuestionCard(this.currentItem(), this.session, this.inFlight);
      case 'feedback':
        return renderFeedback(this.phase.item, this.phase.result);
      case 'completed':
        return renderCompletion(this.session);
    }
  }
}

// ── dashboard ────────────────────────────────────────────────────────────

export class DashboardModel {
  constructor(public stats: DashboardStats) {}

  // Completion bumps the counters locally; no reload round trip.
  applyCompletion(): void {
    this.stats.quizzes_today += 1;
    this.stats.quizzes_total += 1;
  }
}
