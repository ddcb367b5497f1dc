import { describe, expect, it } from "vitest";

import { Controller } from "../src/controller.js";
import { ACTION_BUTTONS, dispatch } from "../src/dispatch.js";
import type { Reply, Request, StateReply, Transport } from "../src/protocol.js";
import {
  applyReply, countErrorBadges, countFrontierHighlights, initialView,
  renderPayload,
} from "../src/render.js";
import { parseTree } from "../src/tree.js";

// real payload trees captured from the server
const TERM_2_TREE = "((var[err] x) {ana=none, mark=ok, syn=?, dirty=[ana,syn]})";
const TERM_15_TREE =
  "((lam[ok,ok] x (arrow bool num) ((ap[ok] ((var[ok] x) {ana=none, mark=ok, " +
  "syn=(arrow bool num), dirty=[]}) ((num 1) {ana=bool, mark=err, syn=num, " +
  "dirty=[]})) {ana=none, mark=ok, syn=num, dirty=[]})) {ana=none, mark=ok, " +
  "syn=(arrow (arrow bool num) num), dirty=[]})";
const HOLE_TREE = "(? {ana=none, mark=ok, syn=?, dirty=[]})";

function state(tree: string, dirty: StateReply["dirty"], errors: number): StateReply {
  return {
    ok: true, revision: 1, quiescent: dirty.length === 0, errors, tree,
    dirty, cursor: [],
  };
}

describe("tree parsing", () => {
  it("parses the worked-example result", () => {
    const t = parseTree(TERM_15_TREE);
    expect(t.form).toBe("lam");
    expect(t.binder).toBe("x");
    expect(t.surface).toBe("(arrow bool num)");
    expect(t.syn).toBe("(arrow (arrow bool num) num)");
    const arg = t.children[0].children[1];
    expect(arg.mark).toBe("err");
    expect(arg.ana).toBe("bool");
  });

  it("parses dirty slots", () => {
    const t = parseTree(TERM_2_TREE);
    expect([...t.dirty].sort()).toEqual(["ana", "syn"]);
    expect(t.marks).toEqual(["err"]);
  });

  it("rejects malformed text", () => {
    expect(() => parseTree("(bogus)")).toThrow();
    expect(() => parseTree(TERM_2_TREE + " trailing")).toThrow();
  });
});

describe("render", () => {
  it("shows a free-variable badge and two frontier highlights", () => {
    const html = renderPayload(state(TERM_2_TREE,
      [{ path: [], slot: "ana" }, { path: [], slot: "syn" }], 1));
    expect(countErrorBadges(html)).toBe(1);
    expect(countFrontierHighlights(html)).toBe(2);
    expect(html).toContain("2 on frontier");
  });

  it("shows zero highlights on a quiescent payload", () => {
    const html = renderPayload(state(HOLE_TREE, [], 0));
    expect(countFrontierHighlights(html)).toBe(0);
    expect(html).toContain("quiescent");
    expect(countErrorBadges(html)).toBe(0);
  });

  it("shows exactly one badge for the worked-example result", () => {
    const html = renderPayload(state(TERM_15_TREE, [], 1));
    expect(countErrorBadges(html)).toBe(1);
    expect(countFrontierHighlights(html)).toBe(0);
  });

  it("hides clean types behind tooltips", () => {
    const html = renderPayload(state(TERM_15_TREE, [], 1));
    expect(html).toContain("hidden-type");
    expect(html).toContain("synthesized: (arrow (arrow bool num) num)");
  });

  it("is a pure function of the payload", () => {
    const payload = state(TERM_15_TREE, [], 1);
    expect(renderPayload(payload)).toBe(renderPayload(payload));
  });

  it("keeps the previous view on a malformed payload", () => {
    let view = applyReply(initialView(), state(HOLE_TREE, [], 0));
    const good = view.html;
    view = applyReply(view, state("(garbage", [], 0));
    expect(view.html).toBe(good);
    expect(view.error).toMatch(/bad payload/);
    view = applyReply(view, { ok: false, error: "ActionInapplicable: nope" });
    expect(view.html).toBe(good);
    expect(view.error).toMatch(/ActionInapplicable/);
  });
});

describe("dispatch", () => {
  it("reaches every edit action", () => {
    const expected = [
      "insert-var", "insert-num", "insert-bool", "insert-nil",
      "wrap-fun", "wrap-ap", "wrap-asc", "wrap-pair", "wrap-fst", "wrap-snd",
      "wrap-cons", "wrap-case", "delete", "unwrap", "set-ann", "set-asc",
      "insert-binder", "delete-binder", "insert-case-binder", "delete-case-binder",
    ];
    expect(ACTION_BUTTONS.map((b) => b.id).sort()).toEqual([...expected].sort());
  });

  it("builds protocol messages", () => {
    expect(dispatch({ kind: "action", name: "insert-var", args: ["x"] }))
      .toEqual({ op: "action", action: "insert-var x" });
    expect(dispatch({ kind: "action", name: "set-ann", args: ["(arrow bool num)"] }))
      .toEqual({ op: "action", action: "set-ann (arrow bool num)" });
    expect(dispatch({ kind: "move-to", path: [1, 2] }))
      .toEqual({ op: "move", path: [1, 2] });
    expect(dispatch({ kind: "step" })).toEqual({ op: "step" });
    expect(dispatch({ kind: "run" })).toEqual({ op: "run" });
  });
});

describe("controller", () => {
  it("serializes requests and applies replies in order", async () => {
    const log: Request[] = [];
    let inFlight = 0;
    const transport: Transport = {
      async request(msg: Request): Promise<Reply> {
        expect(inFlight).toBe(0);
        inFlight++;
        log.push(msg);
        await new Promise((r) => setTimeout(r, 1));
        inFlight--;
        return state(HOLE_TREE, [], 0);
      },
      close() {},
    };
    const c = new Controller(transport);
    const p1 = c.submit({ kind: "open" });
    const p2 = c.submit({ kind: "step" });
    await Promise.all([p1, p2]);
    expect(log.map((m) => m.op)).toEqual(["open", "step"]);
    expect(c.view.error).toBeNull();
    expect(c.view.html).toContain("quiescent");
  });
});
