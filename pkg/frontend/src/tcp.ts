// Node transport: length-prefixed JSON over a TCP socket. Used by the test
// suite and headless tooling; the browser uses the WebSocket transport.

import * as net from "node:net";

import type { Reply, Request, Transport } from "./protocol.js";

export class TcpTransport implements Transport {
  private sock: net.Socket;
  private buffer = Buffer.alloc(0);
  private waiters: ((reply: Reply) => void)[] = [];
  private failures: ((err: Error) => void)[] = [];

  private constructor(sock: net.Socket) {
    this.sock = sock;
    sock.on("data", (chunk) => this.onData(chunk));
    sock.on("error", (err) => this.fail(err));
    sock.on("close", () => this.fail(new Error("connection closed")));
  }

  static connect(host: string, port: number): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const sock = net.createConnection({ host, port }, () => {
        sock.removeListener("error", reject);
        resolve(new TcpTransport(sock));
      });
      sock.once("error", reject);
    });
  }

  request(msg: Request): Promise<Reply> {
    const data = Buffer.from(JSON.stringify(msg), "utf-8");
    const frame = Buffer.alloc(4 + data.length);
    frame.writeUInt32BE(data.length, 0);
    data.copy(frame, 4);
    return new Promise((resolve, reject) => {
      this.waiters.push(resolve);
      this.failures.push(reject);
      this.sock.write(frame);
    });
  }

  close(): void {
    this.sock.destroy();
  }

  private onData(chunk: Buffer): void {
    this.buffer = Buffer.concat([this.buffer, chunk]);
    while (this.buffer.length >= 4) {
      const length = this.buffer.readUInt32BE(0);
      if (this.buffer.length < 4 + length) return;
      const body = this.buffer.subarray(4, 4 + length).toString("utf-8");
      this.buffer = this.buffer.subarray(4 + length);
      const resolve = this.waiters.shift();
      this.failures.shift();
      if (resolve) resolve(JSON.parse(body));
    }
  }

  private fail(err: Error): void {
    const pending = this.failures;
    this.failures = [];
    this.waiters = [];
    for (const reject of pending) reject(err);
  }
}
