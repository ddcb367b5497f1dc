// Map workbench inputs (buttons, cursor keys) to protocol messages. Every
// edit action is reachable through ACTION_BUTTONS; arguments are collected by
// a prompt function so tests can script them.

import type { Request } from "./protocol.js";

export interface ActionButton {
  id: string;           // action name in trace syntax
  label: string;
  args: ("name" | "type" | "child2" | "child3" | "whichcase" | "int" | "bool")[];
}

export const ACTION_BUTTONS: ActionButton[] = [
  { id: "insert-var", label: "insert var", args: ["name"] },
  { id: "insert-num", label: "insert num", args: ["int"] },
  { id: "insert-bool", label: "insert bool", args: ["bool"] },
  { id: "insert-nil", label: "insert nil", args: [] },
  { id: "wrap-fun", label: "wrap λ", args: [] },
  { id: "wrap-ap", label: "wrap ap", args: ["child2"] },
  { id: "wrap-asc", label: "wrap asc", args: [] },
  { id: "wrap-pair", label: "wrap pair", args: ["child2"] },
  { id: "wrap-fst", label: "wrap fst", args: [] },
  { id: "wrap-snd", label: "wrap snd", args: [] },
  { id: "wrap-cons", label: "wrap cons", args: ["child2"] },
  { id: "wrap-case", label: "wrap case", args: ["child3"] },
  { id: "delete", label: "delete", args: [] },
  { id: "unwrap", label: "unwrap", args: ["child3"] },
  { id: "set-ann", label: "set ann", args: ["type"] },
  { id: "set-asc", label: "set asc", args: ["type"] },
  { id: "insert-binder", label: "insert binder", args: ["name"] },
  { id: "delete-binder", label: "delete binder", args: [] },
  { id: "insert-case-binder", label: "insert case binder", args: ["whichcase", "name"] },
  { id: "delete-case-binder", label: "delete case binder", args: ["whichcase"] },
];

export type UserInput =
  | { kind: "action"; name: string; args: string[] }
  | { kind: "move-to"; path: number[] }
  | { kind: "move-up" }
  | { kind: "move-child"; n: number }
  | { kind: "step" }
  | { kind: "step-at"; path: number[]; slot: "ana" | "syn" | "ann" | "asc" }
  | { kind: "run" }
  | { kind: "open"; program?: string };

export function dispatch(input: UserInput): Request {
  switch (input.kind) {
    case "action": {
      const text = [input.name, ...input.args].join(" ").trim();
      return { op: "action", action: text };
    }
    case "move-to":
      return { op: "move", path: input.path };
    case "move-up":
      return { op: "move", dir: "up" };
    case "move-child":
      return { op: "move", dir: "child", n: input.n };
    case "step":
      return { op: "step" };
    case "step-at":
      return { op: "step_at", path: input.path, slot: input.slot };
    case "run":
      return { op: "run" };
    case "open":
      return input.program === undefined
        ? { op: "open" }
        : { op: "open", program: input.program };
  }
}
