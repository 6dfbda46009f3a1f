import type {
  AnswerResponse,
  ApiErrorBody,
  DashboardStats,
  Eligibility,
  MessageExchange,
  QueryIntent,
  QuizWithSession,
  TaskContext,
  Thread,
} from './types';

export interface HttpReply {
  status: number;
  body: unknown;
}

// Transport seam: the browser build wraps fetch, tests substitute a
// scripted fake and record the traffic.
export interface HttpLike {
  request(method: string, path: string, body?: unknown): Promise<HttpReply>;
}

export class ApiFailure extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

export class FetchHttp implements HttpLike {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
  ) {}

  async request(method: string, path: string, body?: unknown): Promise<HttpReply> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body === undefined ? {} : { 'Content-Type': 'application/json' }),
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return { status: response.status, body: await response.json() };
  }
}

function isErrorBody(body: unknown): body is ApiErrorBody {
  return (
    typeof body === 'object' &&
    body !== null &&
    typeof (body as ApiErrorBody).code === 'string'
  );
}

export interface PostMessageBody {
  text: string;
  intent?: QueryIntent;
  context?: Omit<TaskContext, 'source'>;
}

export class ApiClient {
  constructor(private readonly http: HttpLike) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const reply = await this.http.request(method, path, body);
    if (reply.status >= 400) {
      const error = isErrorBody(reply.body)
        ? reply.body
        : { code: 'invalid_output', message: `unexpected reply ${reply.status}` };
      throw new ApiFailure(reply.status, error);
    }
    return reply.body as T;
  }

  listThreads(): Promise<{ threads: Thread[] }> {
    return this.call('GET', '/threads');
  }

  createThread(title: string): Promise<Thread> {
    return this.call('POST', '/threads', { title });
  }

  getThread(threadId: string): Promise<Thread> {
    return this.call('GET', `/threads/${threadId}`);
  }

  postMessage(threadId: string, body: PostMessageBody): Promise<MessageExchange> {
    return this.call('POST', `/threads/${threadId}/messages`, body);
  }

  markMessage(messageId: string, marked: boolean): Promise<{ marked: boolean }> {
    return this.call('POST', `/messages/${messageId}/mark`, { marked });
  }

  dashboard(): Promise<DashboardStats> {
    return this.call('GET', '/dashboard');
  }

  eligibility(): Promise<Eligibility> {
    return this.call('GET', '/notifications/eligibility');
  }

  createQuiz(seed?: number): Promise<QuizWithSession> {
    return this.call('POST', '/quizzes', seed === undefined ? {} : { seed });
  }

  getQuiz(quizId: string): Promise<QuizWithSession> {
    return this.call('GET', `/quizzes/${quizId}`);
  }

  submitAnswer(
    quizId: string,
    questionId: string,
    optionIndex: number,
    expectedVersion?: number,
  ): Promise<AnswerResponse> {
    return this.call('POST', `/quizzes/${quizId}/answers`, {
      question_id: questionId,
      option_index: optionIndex,
      ...(expectedVersion === undefined ? {} : { expected_version: expectedVersion }),
    });
  }
}
