// Message and state types for the session protocol (see ../../protocol.md).

export type Slot = "ana" | "syn" | "ann" | "asc";

export interface DirtyLoc {
  path: number[];
  slot: Slot;
}

export interface StateReply {
  ok: true;
  revision: number;
  quiescent: boolean;
  errors: number;
  tree: string;
  dirty: DirtyLoc[];
  cursor: number[];
  stepped?: string | null;
  steps?: number;
}

export interface ErrorReply {
  ok: false;
  error: string;
  revision?: number;
}

export type Reply = StateReply | ErrorReply;

export type Request =
  | { op: "open"; program?: string }
  | { op: "state" }
  | { op: "move"; path: number[] }
  | { op: "move"; dir: "up" }
  | { op: "move"; dir: "child"; n: number }
  | { op: "action"; action: string }
  | { op: "step" }
  | { op: "step_at"; path: number[]; slot: Slot }
  | { op: "run" };

export interface Transport {
  request(msg: Request): Promise<Reply>;
  close(): void;
}
