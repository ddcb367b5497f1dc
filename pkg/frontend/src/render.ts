// Rendering: the view is a pure function of the last server state reply.
// Error marks get visible badges; dirty type slots (the update propagation
// frontier) get colored underlines; clean type annotations are hidden behind
// hover tooltips.

import type { StateReply } from "./protocol.js";
import { DecNode, parseTree } from "./tree.js";

export interface ViewState {
  revision: number;
  payload: StateReply | null;
  html: string;
  error: string | null;   // banner text; the previous view stays up
  pending: boolean;
}

export function initialView(): ViewState {
  return { revision: -1, payload: null, html: "", error: null, pending: false };
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function badge(): string {
  return `<span class="badge err" title="type error">✗</span>`;
}

function typeChip(slot: string, label: string, value: string | null,
                  dirty: boolean): string {
  const text = value === null ? "□" : value;
  if (dirty) {
    return `<span class="type frontier frontier-${slot}" title="${esc(label)}">` +
      `${esc(text)}</span>`;
  }
  return `<span class="type hidden-type" title="${esc(label)}: ${esc(text)}"></span>`;
}

function binderText(b: string | undefined): string {
  return b === undefined || b === "?" ? "?" : b;
}

function renderNode(n: DecNode, path: number[], cursor: number[]): string {
  const here = path.join(".");
  const atCursor = here === cursor.join(".");
  const classes = ["node", `form-${n.form}`];
  if (atCursor) classes.push("cursor");
  const wrapErr = n.mark === "err" ? badge() : "";
  const formErr = (i: number) => (n.marks[i] === "err" ? badge() : "");
  const child = (i: number) => renderNode(n.children[i], [...path, i + 1], cursor);
  let body: string;
  switch (n.form) {
    case "hole":
      body = `?`;
      break;
    case "var":
      body = `${esc(n.name ?? "")}${formErr(0)}`;
      break;
    case "num":
    case "bool":
      body = esc(n.value ?? "");
      break;
    case "nil":
      body = "nil";
      break;
    case "lam":
      body = `λ${esc(binderText(n.binder))}${formErr(0)}${formErr(1)}` +
        `:<span class="ann${n.dirty.has("ann") ? " frontier frontier-ann" : ""}"` +
        ` title="annotation">${esc(n.surface ?? "?")}</span> ↦ ${child(0)}`;
      break;
    case "ap":
      body = `${child(0)} ◁${formErr(0)} ${child(1)}`;
      break;
    case "asc":
      body = `${child(0)} : <span class="ann${n.dirty.has("asc") ? " frontier frontier-asc" : ""}"` +
        ` title="ascription">${esc(n.surface ?? "?")}</span>`;
      break;
    case "pair":
      body = `pair${formErr(0)} ${child(0)} ${child(1)}`;
      break;
    case "fst":
    case "snd":
      body = `${n.form}${formErr(0)} ${child(0)}`;
      break;
    case "cons":
      body = `${child(0)} ::${formErr(0)} ${child(1)}`;
      break;
    case "case":
      body = `case${formErr(0)} ${child(0)} of nil ⇒ ${child(1)} | ` +
        `${esc(binderText(n.binder))}::${esc(binderText(n.binder2))} ⇒ ${child(2)}`;
      break;
    default:
      body = esc(n.form);
  }
  const ana = typeChip("ana", "analyzed", n.ana, n.dirty.has("ana"));
  const syn = typeChip("syn", "synthesized", n.syn, n.dirty.has("syn"));
  return `<span class="${classes.join(" ")}" data-path="${here}">` +
    `${ana}${wrapErr}(${body})${syn}</span>`;
}

export function renderPayload(payload: StateReply): string {
  const tree = parseTree(payload.tree);
  const status = payload.quiescent
    ? `<span class="status quiescent">quiescent</span>`
    : `<span class="status busy">${payload.dirty.length} on frontier</span>`;
  return `<div class="workbench" data-revision="${payload.revision}">` +
    `<div class="meta">rev ${payload.revision} · ` +
    `${payload.errors} error${payload.errors === 1 ? "" : "s"} · ${status}</div>` +
    `<div class="tree">${renderNode(tree, [], payload.cursor)}</div></div>`;
}

export function applyReply(view: ViewState, reply: unknown): ViewState {
  const r = reply as { ok?: boolean; error?: string };
  if (!r || typeof r !== "object" || r.ok === undefined) {
    return { ...view, error: "malformed reply", pending: false };
  }
  if (!r.ok) {
    return { ...view, error: r.error ?? "unknown error", pending: false };
  }
  const payload = reply as StateReply;
  try {
    const html = renderPayload(payload);
    return { revision: payload.revision, payload, html, error: null, pending: false };
  } catch (exc) {
    // malformed payload: keep the previous view, show a banner
    return { ...view, error: `bad payload: ${(exc as Error).message}`, pending: false };
  }
}

export function countErrorBadges(html: string): number {
  return (html.match(/class="badge err"/g) ?? []).length;
}

export function countFrontierHighlights(html: string): number {
  return (html.match(/class="[^"]*\bfrontier\b/g) ?? []).length;
}
