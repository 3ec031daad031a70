import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { ChatSession } from "../src/chat";
import { MockServer, answer, askResponse, labelRows } from "./mock";

function setup() {
  const server = new MockServer();
  server.set("GET", "/policies/p1/labels", labelRows([
    [0, ["data-security"]],
    [1, ["third-party-sharing-collection"]],
    [2, ["first-party-collection-use"]],
  ]));
  const client = new ApiClient("", server.fetch);
  const container = document.createElement("div");
  document.body.appendChild(container);
  return { server, chat: new ChatSession(client, "p1", container), container };
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("ChatSession rendering", () => {
  it("renders answers in server rank order, verbatim", async () => {
    const { server, chat } = setup();
    const body = askResponse([
      answer({ segment_index: 2, rank: 1, score: 0.9, confidence: 0.4 }),
      answer({ segment_index: 0, rank: 2, score: 0.7, confidence: 0.35 }),
      answer({ segment_index: 1, rank: 3, score: 0.5, confidence: 0.31 }),
    ]);
    server.set("POST", "/policies/p1/ask", body);
    const turn = await chat.ask("do you share my data?");
    const items = Array.from(turn.querySelectorAll<HTMLElement>(".chat-answer"));
    expect(items.map((el) => el.dataset.segmentIndex)).toEqual(["2", "0", "1"]);
    expect(items.map((el) => el.dataset.rank)).toEqual(["1", "2", "3"]);
    const texts = items.map((el) => el.querySelector(".answer-text")?.textContent);
    expect(texts).toEqual(body.answers.map((a) => a.text));
  });

  it("shows at most three answers", async () => {
    const { server, chat } = setup();
    server.set(
      "POST",
      "/policies/p1/ask",
      askResponse([
        answer({ segment_index: 0, rank: 1, confidence: 0.4 }),
        answer({ segment_index: 1, rank: 2, confidence: 0.4 }),
        answer({ segment_index: 2, rank: 3, confidence: 0.4 }),
        answer({ segment_index: 3, rank: 4, confidence: 0.4 }),
      ]),
    );
    const turn = await chat.ask("q");
    expect(turn.querySelectorAll(".chat-answer").length).toBe(3);
  });

  it("collapses to one answer when exactly one is high-confidence", async () => {
    const { server, chat } = setup();
    server.set(
      "POST",
      "/policies/p1/ask",
      askResponse([
        answer({ segment_index: 0, rank: 1, confidence: 0.82 }),
        answer({ segment_index: 1, rank: 2, confidence: 0.35 }),
        answer({ segment_index: 2, rank: 3, confidence: 0.2 }),
      ]),
    );
    const turn = await chat.ask("q");
    const items = turn.querySelectorAll<HTMLElement>(".chat-answer");
    expect(items.length).toBe(1);
    expect(items[0].dataset.segmentIndex).toBe("0");
  });

  it("keeps all answers when several are high-confidence", async () => {
    const { server, chat } = setup();
    server.set(
      "POST",
      "/policies/p1/ask",
      askResponse([
        answer({ segment_index: 0, rank: 1, confidence: 0.9 }),
        answer({ segment_index: 1, rank: 2, confidence: 0.7 }),
      ]),
    );
    const turn = await chat.ask("q");
    expect(turn.querySelectorAll(".chat-answer").length).toBe(2);
  });

  it("renders a category badge from the gated labels", async () => {
    const { server, chat } = setup();
    server.set(
      "POST",
      "/policies/p1/ask",
      askResponse([answer({ segment_index: 1, confidence: 0.4 })]),
    );
    const turn = await chat.ask("q");
    expect(turn.querySelector(".answer-category-badge")?.textContent).toBe(
      "third-party-sharing-collection",
    );
  });

  it("renders a conflict warning for flagged pairs", async () => {
    const { server, chat } = setup();
    server.set(
      "POST",
      "/policies/p1/ask",
      askResponse([
        answer({ segment_index: 0, rank: 1, confidence: 0.4, conflicts: [1] }),
        answer({ segment_index: 1, rank: 2, confidence: 0.4, conflicts: [0] }),
      ]),
    );
    const turn = await chat.ask("q");
    const warning = turn.querySelector(".conflict-warning");
    expect(warning).not.toBeNull();
    expect(warning?.textContent).toContain("contradict");
    const flagged = turn.querySelectorAll('[data-conflict="true"]');
    expect(flagged.length).toBe(2);
  });

  it("renders the low-confidence notice with unknown-words explanation", async () => {
    const { server, chat } = setup();
    server.set(
      "POST",
      "/policies/p1/ask",
      askResponse(
        [answer({ segment_index: 0, confidence: 0.05, low_confidence: true })],
        {
          frac_q: 0.0,
          possibly_unanswerable: true,
          notices: ["low_confidence", "unknown_words"],
        },
      ),
    );
    const turn = await chat.ask("do you bla bla bla?");
    expect(turn.querySelector('[data-notice="low_confidence"]')).not.toBeNull();
    const unknown = turn.querySelector('[data-notice="unknown_words"]');
    expect(unknown?.textContent).toContain("unknown");
  });

  it("renders confidence bands as classes", async () => {
    const { server, chat } = setup();
    // two high answers (no single-high collapse), then a medium/low turn
    server.set(
      "POST",
      "/policies/p1/ask",
      askResponse([
        answer({ segment_index: 0, rank: 1, confidence: 0.9 }),
        answer({ segment_index: 1, rank: 2, confidence: 0.7 }),
      ]),
    );
    const highTurn = await chat.ask("q1");
    const highClasses = Array.from(highTurn.querySelectorAll(".chat-answer")).map(
      (el) => el.className,
    );
    expect(highClasses[0]).toContain("confidence-high");
    expect(highClasses[1]).toContain("confidence-high");

    server.set(
      "POST",
      "/policies/p1/ask",
      askResponse([
        answer({ segment_index: 1, rank: 1, confidence: 0.45 }),
        answer({ segment_index: 2, rank: 2, confidence: 0.1 }),
      ]),
    );
    const mixedTurn = await chat.ask("q2");
    const mixedClasses = Array.from(mixedTurn.querySelectorAll(".chat-answer")).map(
      (el) => el.className,
    );
    expect(mixedClasses[0]).toContain("confidence-medium");
    expect(mixedClasses[1]).toContain("confidence-low");
  });
});

describe("ChatSession error states", () => {
  const codes = [
    ["bad_input", 400],
    ["not_found", 404],
    ["model_missing", 409],
    ["ambiguous_question", 422],
    ["internal", 500],
  ] as const;

  it("renders a distinct state per error code", async () => {
    const seen = new Set<string>();
    for (const [code, status] of codes) {
      const { server, chat } = setup();
      server.set("POST", "/policies/p1/ask", {
        error: { status, code, message: code },
      });
      const turn = await chat.ask("q");
      const box = turn.querySelector<HTMLElement>(".chat-error");
      expect(box).not.toBeNull();
      expect(box!.dataset.errorCode).toBe(code);
      seen.add(box!.className + "|" + box!.textContent);
    }
    expect(seen.size).toBe(codes.length);
  });

  it("renders a clarification prompt on 422", async () => {
    const { server, chat } = setup();
    server.set("POST", "/policies/p1/ask", {
      error: { status: 422, code: "ambiguous_question", message: "no signal" },
    });
    const turn = await chat.ask("???");
    expect(turn.querySelector(".chat-error")?.textContent).toContain("clarify");
  });

  it("offers a retry button on network failure and retries", async () => {
    const { server, chat, container } = setup();
    server.failNetwork = true;
    const turn = await chat.ask("q");
    const retry = turn.querySelector<HTMLButtonElement>(".retry-button");
    expect(retry).not.toBeNull();

    server.failNetwork = false;
    server.set("POST", "/policies/p1/ask", askResponse([answer({ confidence: 0.4 })]));
    retry!.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(container.querySelectorAll(".chat-answer").length).toBe(1);
  });
});
