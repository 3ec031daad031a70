// Page bootstrap: ingest form, chat pane, explorer pane.

import { ApiClient } from "./api";
import { ChatSession } from "./chat";
import { ExplorerView } from "./explorer";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function boot(baseUrl = ""): void {
  const client = new ApiClient(baseUrl);
  let chat: ChatSession | null = null;
  let explorer: ExplorerView | null = null;

  const ingestForm = el<HTMLFormElement>("ingest-form");
  ingestForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const policyId = el<HTMLInputElement>("policy-id").value.trim();
    const source = el<HTMLTextAreaElement>("policy-source").value;
    void client
      .ingest(policyId, source)
      .then((res) => {
        el<HTMLElement>("ingest-status").textContent =
          `Loaded ${res.policy_id}: ${res.segment_count} segments`;
        chat = new ChatSession(client, policyId, el("chat-turns"));
        explorer = new ExplorerView(client, policyId, el("explorer-root"));
        return explorer.load();
      })
      .catch((err) => {
        el<HTMLElement>("ingest-status").textContent = `Failed: ${err.message}`;
      });
  });

  const questionForm = el<HTMLFormElement>("question-form");
  questionForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const input = el<HTMLInputElement>("question-input");
    if (chat && input.value.trim()) {
      void chat.ask(input.value.trim());
      input.value = "";
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("ingest-form")) {
  boot();
}
