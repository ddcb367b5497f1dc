// View controller: one in-flight request at a time, queued inputs, and a view
// state that is always a pure function of the last good server reply.

import { dispatch, UserInput } from "./dispatch.js";
import type { Reply, Transport } from "./protocol.js";
import { applyReply, initialView, ViewState } from "./render.js";

export class Controller {
  view: ViewState = initialView();
  private queue: Promise<void> = Promise.resolve();

  constructor(private transport: Transport,
              private onChange: (view: ViewState) => void = () => {}) {}

  submit(input: UserInput): Promise<ViewState> {
    const run = async () => {
      this.view = { ...this.view, pending: true };
      this.onChange(this.view);
      let reply: Reply | { ok: false; error: string };
      try {
        reply = await this.transport.request(dispatch(input));
      } catch (exc) {
        reply = { ok: false, error: `transport: ${(exc as Error).message}` };
      }
      this.view = applyReply(this.view, reply);
      this.onChange(this.view);
      return this.view;
    };
    const result = this.queue.then(run);
    this.queue = result.then(() => undefined, () => undefined);
    return result;
  }

  lastReply(): ViewState["payload"] {
    return this.view.payload;
  }
}
