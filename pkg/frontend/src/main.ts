/** Browser entry point: wire the session, renderer, and keyboard flow. */

import { ApiClient } from "./api.js";
import { handleKey } from "./keyboard.js";
import { renderApp } from "./render.js";
import { ConsoleSession } from "./session.js";

function param(name: string, fallback: string): string {
  const url = new URL(window.location.href);
  return url.searchParams.get(name) ?? window.localStorage.getItem(`auditbench:${name}`) ?? fallback;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const server = param("server", window.location.origin);
  const token = param("token", "");
  const roundId = param("round", "");
  if (!token || !roundId) {
    root.textContent = "open with ?server=...&token=...&round=... query parameters";
    return;
  }
  window.localStorage.setItem("auditbench:server", server);
  window.localStorage.setItem("auditbench:token", token);
  window.localStorage.setItem("auditbench:round", roundId);

  const api = new ApiClient(server, token);
  const session = new ConsoleSession(api, roundId, window.localStorage);
  await session.load();
  renderApp(session, root);

  document.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "TEXTAREA" || target.tagName === "SELECT")) {
      return; // typing a rationale or picking a code
    }
    void handleKey(session, event.key)
      .catch((error) => {
        const hint = document.getElementById("error-banner");
        if (hint) hint.textContent = String(error instanceof Error ? error.message : error);
      })
      .finally(() => renderApp(session, root));
  });
}

void boot();
