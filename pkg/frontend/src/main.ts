// Browser bootstrap: wires the controller to the page served by
// `incmark serve --web`.

import { Controller } from "./controller.js";
import { ACTION_BUTTONS } from "./dispatch.js";
import { WsTransport } from "./ws.js";

function promptArgs(spec: string[]): string[] | null {
  const args: string[] = [];
  for (const kind of spec) {
    const hint = {
      name: "variable name", int: "integer", bool: "true or false",
      type: "type, e.g. (arrow bool num)", child2: "child: one or two",
      child3: "child: one, two or three", whichcase: "hd or tl",
    }[kind as string] ?? kind;
    const value = window.prompt(hint);
    if (value === null) return null;
    args.push(value.trim());
  }
  return args;
}

async function boot() {
  const root = document.getElementById("view")!;
  const banner = document.getElementById("banner")!;
  const buttons = document.getElementById("buttons")!;
  const transport = await WsTransport.connect(`ws://${location.host}/session`);
  const controller = new Controller(transport, (view) => {
    if (view.html) root.innerHTML = view.html;
    banner.textContent = view.error ?? "";
    banner.style.display = view.error ? "block" : "none";
  });

  for (const spec of ACTION_BUTTONS) {
    const b = document.createElement("button");
    b.textContent = spec.label;
    b.onclick = () => {
      const args = promptArgs(spec.args);
      if (args !== null) controller.submit({ kind: "action", name: spec.id, args });
    };
    buttons.appendChild(b);
  }
  for (const [label, input] of [
    ["step", { kind: "step" }],
    ["run to quiescence", { kind: "run" }],
    ["cursor up", { kind: "move-up" }],
    ["cursor child 1", { kind: "move-child", n: 1 }],
    ["cursor child 2", { kind: "move-child", n: 2 }],
    ["cursor child 3", { kind: "move-child", n: 3 }],
    ["reset", { kind: "open" }],
  ] as const) {
    const b = document.createElement("button");
    b.textContent = label as string;
    b.onclick = () => controller.submit(input as never);
    buttons.appendChild(b);
  }
  // click a node to move the cursor there
  root.addEventListener("click", (ev) => {
    const target = (ev.target as HTMLElement).closest("[data-path]");
    if (!target) return;
    const text = target.getAttribute("data-path")!;
    const path = text === "" ? [] : text.split(".").map(Number);
    controller.submit({ kind: "move-to", path });
    ev.stopPropagation();
  });
  await controller.submit({ kind: "open" });
}

boot().catch((exc) => {
  const banner = document.getElementById("banner");
  if (banner) {
    banner.textContent = String(exc);
    banner.style.display = "block";
  }
});
