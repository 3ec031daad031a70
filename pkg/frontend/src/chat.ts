// Conversation loop: one DOM "turn" per question, rendered strictly from
// the API response. The client never reorders, filters, or rescores
// answers; the only display rule is the single-high-confidence collapse.

import { ApiClient, ApiRequestError, NetworkError } from "./api";
import type { AskResponse, LabelRow, RankedAnswer } from "./types";
import { confidenceBand } from "./types";

const NOTICE_TEXT: Record<string, string> = {
  low_confidence:
    "I am not confident the policy answers this question; the text below may be unrelated.",
  ambiguous_question:
    "The question was interpreted ambiguously; try asking about one topic at a time.",
  unknown_words:
    "Several words in the question are unknown to the policy vocabulary, which lowers confidence.",
};

const ERROR_TEXT: Record<ApiRequestError["code"], string> = {
  bad_input: "The request was rejected; please rephrase and try again.",
  not_found: "This policy has not been loaded yet.",
  model_missing: "The analysis models are not available on the server.",
  ambiguous_question: "Please clarify your question and ask again.",
  internal: "The server hit an internal error.",
};

export class ChatSession {
  private labelCache: Map<number, string[]> | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly policyId: string,
    private readonly container: HTMLElement,
    private readonly maxAnswers = 3,
  ) {}

  /** Ask one question; appends and returns the rendered turn element. */
  async ask(question: string): Promise<HTMLElement> {
    const turn = this.container.ownerDocument.createElement("section");
    turn.className = "chat-turn";
    turn.dataset.question = question;
    const q = turn.ownerDocument.createElement("p");
    q.className = "chat-question";
    q.textContent = question;
    turn.appendChild(q);
    this.container.appendChild(turn);

    try {
      const response = await this.client.ask(this.policyId, question);
      await this.renderAnswers(turn, response);
    } catch (err) {
      this.renderError(turn, question, err);
    }
    return turn;
  }

  private async categoryBadge(segmentIndex: number): Promise<string> {
    if (this.labelCache === null) {
      try {
        const rows: LabelRow[] = await this.client.labels(this.policyId);
        this.labelCache = new Map(rows.map((r) => [r.segment_index, r.categories]));
      } catch {
        this.labelCache = new Map();
      }
    }
    const categories = this.labelCache.get(segmentIndex) ?? [];
    return categories.length ? categories[0] : "uncategorized";
  }

  private displayedAnswers(response: AskResponse): RankedAnswer[] {
    const answers = response.answers.slice(0, this.maxAnswers);
    const high = answers.filter((a) => confidenceBand(a.confidence) === "high");
    // a turn with exactly one confident answer shows only that answer
    if (high.length === 1) return high;
    return answers;
  }

  private async renderAnswers(turn: HTMLElement, response: AskResponse): Promise<void> {
    const doc = turn.ownerDocument;
    for (const notice of response.notices) {
      const div = doc.createElement("div");
      div.className = `notice notice-${notice.replace(/_/g, "-")}`;
      div.dataset.notice = notice;
      div.textContent = NOTICE_TEXT[notice] ?? notice;
      turn.appendChild(div);
    }

    const displayed = this.displayedAnswers(response);
    const shownIndices = new Set(displayed.map((a) => a.segment_index));
    const conflicted = displayed.filter((a) => a.conflicts.length > 0);
    if (conflicted.length > 0) {
      const warning = doc.createElement("div");
      warning.className = "conflict-warning";
      const pairs = conflicted
        .map((a) => `${a.segment_index} vs ${a.conflicts.join(", ")}`)
        .join("; ");
      warning.textContent =
        `These answers may contradict each other (segments ${pairs}); ` +
        "one may state an exception to the other.";
      turn.appendChild(warning);
    }

    const list = doc.createElement("ol");
    list.className = "chat-answers";
    for (const answer of displayed) {
      const item = doc.createElement("li");
      item.className = `chat-answer confidence-${confidenceBand(answer.confidence)}`;
      item.dataset.segmentIndex = String(answer.segment_index);
      item.dataset.rank = String(answer.rank);
      item.dataset.conflict = String(
        answer.conflicts.some((c) => shownIndices.has(c)) || answer.conflicts.length > 0,
      );

      const badge = doc.createElement("span");
      badge.className = "answer-category-badge";
      badge.textContent = await this.categoryBadge(answer.segment_index);
      item.appendChild(badge);

      const text = doc.createElement("p");
      text.className = "answer-text";
      text.textContent = answer.text;
      item.appendChild(text);

      const meta = doc.createElement("span");
      meta.className = "answer-meta";
      meta.textContent = `confidence ${(answer.confidence * 100).toFixed(0)}%`;
      item.appendChild(meta);

      list.appendChild(item);
    }
    turn.appendChild(list);
  }

  private renderError(turn: HTMLElement, question: string, err: unknown): void {
    const doc = turn.ownerDocument;
    const box = doc.createElement("div");
    if (err instanceof ApiRequestError) {
      box.className = `chat-error error-${err.code.replace(/_/g, "-")}`;
      box.dataset.errorCode = err.code;
      box.textContent = ERROR_TEXT[err.code];
    } else if (err instanceof NetworkError) {
      box.className = "chat-error error-network";
      box.dataset.errorCode = "network";
      box.textContent = "Could not reach the server.";
      const retry = doc.createElement("button");
      retry.className = "retry-button";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => {
        turn.remove();
        void this.ask(question);
      });
      box.appendChild(retry);
    } else {
      box.className = "chat-error error-unknown";
      box.dataset.errorCode = "unknown";
      box.textContent = "Something went wrong.";
    }
    turn.appendChild(box);
  }
}
