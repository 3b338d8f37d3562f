/**
 * Keyboard-first decision flow.
 *
 * a / r        accept / reject
 * 1 / 2 / 3    confidence: Certain / Confident / Uncertain
 * j or n       next dispute        k or p   previous dispute
 * Enter        submit current draft
 * s            skip (leave unaudited)
 */

import type { ConsoleSession } from "./session.js";

export type KeyAction =
  | "accept"
  | "reject"
  | "certain"
  | "confident"
  | "uncertain"
  | "next"
  | "prev"
  | "submit"
  | "skip"
  | "none";

const KEYMAP: Record<string, KeyAction> = {
  a: "accept",
  r: "reject",
  "1": "certain",
  "2": "confident",
  "3": "uncertain",
  j: "next",
  n: "next",
  k: "prev",
  p: "prev",
  Enter: "submit",
  s: "skip",
};

export function actionForKey(key: string): KeyAction {
  return KEYMAP[key] ?? "none";
}

/** Apply one keystroke to the session; returns the action taken. */
export async function handleKey(session: ConsoleSession, key: string): Promise<KeyAction> {
  const action = actionForKey(key);
  switch (action) {
    case "accept":
      session.setDecision("ACCEPT");
      break;
    case "reject":
      session.setDecision("REJECT");
      break;
    case "certain":
      session.setConfidence("Certain");
      break;
    case "confident":
      session.setConfidence("Confident");
      break;
    case "uncertain":
      session.setConfidence("Uncertain");
      break;
    case "next":
      session.next();
      break;
    case "prev":
      session.prev();
      break;
    case "submit":
      await session.submit();
      break;
    case "skip":
      await session.skip();
      break;
    case "none":
      break;
  }
  return action;
}
