// Browser transport: the same JSON messages over a WebSocket. Requests and
// replies are strictly paired, matching the server's one-reply-per-request
// contract.

import type { Reply, Request, Transport } from "./protocol.js";

export class WsTransport implements Transport {
  private waiters: ((reply: Reply) => void)[] = [];

  private constructor(private ws: WebSocket) {
    ws.onmessage = (ev) => {
      const resolve = this.waiters.shift();
      if (resolve) resolve(JSON.parse(ev.data as string));
    };
  }

  static connect(url: string): Promise<WsTransport> {
    return new Promise((resolve, reject) => {
      const ws = new WebSocket(url);
      ws.onopen = () => resolve(new WsTransport(ws));
      ws.onerror = () => reject(new Error(`cannot reach ${url}`));
    });
  }

  request(msg: Request): Promise<Reply> {
    return new Promise((resolve) => {
      this.waiters.push(resolve);
      this.ws.send(JSON.stringify(msg));
    });
  }

  close(): void {
    this.ws.close();
  }
}
