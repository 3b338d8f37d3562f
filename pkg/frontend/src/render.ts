/**
 * DOM rendering: dispute queue with progress, side-by-side incumbent vs
 * proposal panes, claim-in-context report pane with span highlighting, and
 * the decision form.  Pure functions of session state; all interaction is
 * routed back through the session.
 */

import type { ConsoleSession } from "./session.js";
import type { DisputeView } from "./types.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/**
 * Report pane scrolled to the claim, with the exact character span wrapped
 * in a highlight mark.  Malformed offsets degrade to an unhighlighted pane
 * with a warning badge.
 */
export function renderReportPane(view: DisputeView): HTMLElement {
  const pane = el("div", "report-pane");
  const excerpt = view.report_excerpt;
  const start = view.claim_start;
  const end = view.claim_end;
  const valid = start >= 0 && end > start && end <= excerpt.length;
  if (!valid) {
    pane.appendChild(el("span", "badge badge-warning", "claim span unavailable"));
    pane.appendChild(el("pre", "report-text", excerpt));
    return pane;
  }
  const pre = el("pre", "report-text");
  pre.appendChild(document.createTextNode(excerpt.slice(0, start)));
  const mark = el("mark", "claim-highlight", excerpt.slice(start, end));
  mark.id = "active-claim";
  pre.appendChild(mark);
  pre.appendChild(document.createTextNode(excerpt.slice(end)));
  pane.appendChild(pre);
  return pane;
}

export function scrollToClaim(pane: HTMLElement): void {
  const mark = pane.querySelector("#active-claim");
  if (mark && "scrollIntoView" in mark) {
    (mark as HTMLElement).scrollIntoView({ block: "center" });
  }
}

function renderRationale(title: string, side: "incumbent" | "proposal", view: DisputeView): HTMLElement {
  const data = side === "incumbent" ? view.incumbent : view.proposal;
  const card = el("section", `rationale rationale-${side}`);
  card.appendChild(el("h3", "rationale-title", title));
  card.appendChild(el("div", `verdict verdict-${data.verdict.toLowerCase()}`, data.verdict));
  card.appendChild(el("p", "rationale-text", data.rationale_text));
  if (data.evidence_refs.length > 0) {
    const list = el("ul", "evidence-list");
    for (const ref of data.evidence_refs) {
      const item = el("li");
      const link = el("a", "evidence-link", ref) as HTMLAnchorElement;
      link.href = ref.startsWith("http") ? ref : "#";
      link.target = "_blank";
      item.appendChild(link);
      list.appendChild(item);
    }
    card.appendChild(list);
  }
  return card;
}

function renderDefinitions(view: DisputeView): HTMLElement {
  const box = el("details", "definitions");
  box.appendChild(el("summary", undefined, "label definitions & error codes"));
  const labels = el("dl", "label-definitions");
  for (const [label, definition] of Object.entries(view.label_definitions)) {
    labels.appendChild(el("dt", undefined, label));
    labels.appendChild(el("dd", undefined, definition));
  }
  box.appendChild(labels);
  const codes = el("dl", "error-codes");
  for (const entry of view.error_codes) {
    codes.appendChild(el("dt", undefined, `${entry.code} (${entry.stage})`));
    codes.appendChild(el("dd", undefined, entry.description));
  }
  box.appendChild(codes);
  return box;
}

function renderForm(session: ConsoleSession, view: DisputeView): HTMLElement {
  const form = el("div", "decision-form");
  const draft = session.draftFor(view.dispute_id);

  const decisionRow = el("div", "row decision-row");
  for (const decision of ["ACCEPT", "REJECT"] as const) {
    const button = el(
      "button",
      `btn decision ${draft.decision === decision ? "selected" : ""}`,
      decision,
    );
    button.addEventListener("click", () => session.setDecision(decision));
    decisionRow.appendChild(button);
  }
  form.appendChild(decisionRow);

  const confidenceRow = el("div", "row confidence-row");
  for (const confidence of ["Certain", "Confident", "Uncertain"] as const) {
    const button = el(
      "button",
      `btn confidence ${draft.confidence === confidence ? "selected" : ""}`,
      confidence,
    );
    button.addEventListener("click", () => session.setConfidence(confidence));
    confidenceRow.appendChild(button);
  }
  form.appendChild(confidenceRow);

  const outcome = draft.decision ? session.outcomeVerdict(view, draft) : undefined;
  if (outcome === "Inconclusive" || outcome === "Contradictory") {
    const select = el("select", "error-code-select") as HTMLSelectElement;
    select.appendChild(el("option", undefined, "choose error code") as HTMLOptionElement);
    for (const entry of view.error_codes) {
      const option = el("option", undefined, `${entry.code}: ${entry.description}`) as HTMLOptionElement;
      option.value = entry.code;
      if (draft.errorCode === entry.code) option.selected = true;
      select.appendChild(option);
    }
    select.addEventListener("change", () => session.setErrorCode(select.value || undefined));
    form.appendChild(select);
  }

  const rationale = el("textarea", "override-rationale") as HTMLTextAreaElement;
  rationale.placeholder = "optional rationale override (used on ACCEPT)";
  rationale.value = draft.rationaleText ?? "";
  rationale.addEventListener("input", () => session.setRationale(rationale.value));
  form.appendChild(rationale);

  const invalid = session.validate(view, draft);
  if (invalid) {
    form.appendChild(el("div", "validation-hint", invalid.message));
  }
  const submit = el("button", "btn submit", "submit (Enter)");
  submit.addEventListener("click", () => void session.submit());
  form.appendChild(submit);
  return form;
}

/** Full application render into the root element. */
export function renderApp(session: ConsoleSession, root: HTMLElement): void {
  root.textContent = "";
  const progress = session.progress();
  const header = el("header", "console-header");
  header.appendChild(el("h1", undefined, "audit console"));
  header.appendChild(
    el(
      "div",
      "progress",
      `${progress.done}/${progress.total} decided - ${progress.remaining} remaining`,
    ),
  );
  root.appendChild(header);

  if (session.committed || progress.total === 0) {
    const done = el("div", "committed-view");
    done.appendChild(el("h2", undefined, "round committed"));
    const link = el("a", "report-link", "view round report") as HTMLAnchorElement;
    link.href = `#report/${session.roundId}`;
    done.appendChild(link);
    root.appendChild(done);
    return;
  }

  const queue = el("nav", "queue");
  session.queue.forEach((view, index) => {
    const entry = el(
      "button",
      `queue-entry status-${view.status} ${index === session.cursor ? "active" : ""}`,
      `${index + 1}. ${view.claim_id} (${view.status})`,
    );
    entry.addEventListener("click", () => {
      while (session.cursor !== index) session.next();
      renderApp(session, root);
    });
    queue.appendChild(entry);
  });
  root.appendChild(queue);

  const view = session.current();
  if (!view) return;
  const main = el("main", "dispute");
  main.appendChild(el("h2", "claim-text", view.claim_text));
  const panes = el("div", "side-by-side");
  panes.appendChild(renderRationale("incumbent", "incumbent", view));
  panes.appendChild(renderRationale("proposal", "proposal", view));
  main.appendChild(panes);
  const reportPane = renderReportPane(view);
  main.appendChild(reportPane);
  main.appendChild(renderDefinitions(view));
  main.appendChild(renderForm(session, view));
  root.appendChild(main);
  scrollToClaim(reportPane);
}
