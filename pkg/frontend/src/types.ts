// Wire types, mirroring the REST API's JSON exactly.

export type QueryIntent = 'lookup' | 'translation' | 'proofread' | 'text';

export interface DictionaryPayload {
  type: 'dictionary';
  headword: string;
  meanings: string[];
  synonyms: string[];
  example_sentences: string[];
}

export interface TranslationPayload {
  type: 'translation';
  original: string;
  translated: string;
  explanation: string;
}

export interface RefinementPayload {
  type: 'refinement';
  original: string;
  refined: string;
  rationale: string;
}

export interface TextPayload {
  type: 'text';
  body: string;
}

export type ResponsePayload =
  | DictionaryPayload
  | TranslationPayload
  | RefinementPayload
  | TextPayload;

export interface TaskContext {
  surrounding_text: string;
  task_description: string;
  source: string;
}

export interface ChatMessage {
  id: string;
  thread_id: string;
  author: 'user' | 'assistant';
  text: string;
  created_at: string;
  intent: QueryIntent | null;
  payload: ResponsePayload | null;
  marked: boolean;
  context: TaskContext | null;
}

export interface Thread {
  id: string;
  title: string;
  created_at: string;
  messages: ChatMessage[];
}

// The pre-submission question view. The server never includes the key,
// explanation, or rationale here; the type has no fields for them.
export interface PublicQuestion {
  id: string;
  stem: string;
  options: string[];
  context_hint: string | null;
  marked_source: boolean;
}

export interface QuizItem {
  question: PublicQuestion;
  was_new: boolean;
}

export interface Quiz {
  id: string;
  user_id: string;
  created_at: string;
  partial: boolean;
  items: QuizItem[];
}

export interface Session {
  id: string;
  quiz_id: string;
  state: 'active' | 'completed' | 'abandoned';
  version: number;
  queue: string[];
  solved: string[];
  progress: number;
}

export interface QuizWithSession {
  quiz: Quiz;
  session: Session | null;
}

export interface AnswerResponse {
  correct: boolean;
  explanation: string;
  key_index: number;
  completed: boolean;
  session: Session;
}

export interface DashboardStats {
  quizzes_today: number;
  quizzes_total: number;
  new_questions_available: number;
}

export interface Eligibility {
  eligible: boolean;
  reasons: string[];
}

export interface MessageExchange {
  user_message: ChatMessage;
  assistant_message: ChatMessage;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}
