/** Shared test utilities: fake storage, recording fetch, service process. */

import { spawn, type ChildProcess } from "node:child_process";
import net from "node:net";
import type { KeyValueStorage } from "../src/types.js";
import type { FetchLike } from "../src/api.js";

export class MemoryStorage implements KeyValueStorage {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.has(key) ? (this.map.get(key) as string) : null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}

export interface RecordedExchange {
  method: string;
  url: string;
  requestBody: string;
  responseBody: string;
  status: number;
}

/**
 * Fetch wrapper that records every request/response body, and can simulate
 * a network failure on the response leg (the server processes the request,
 * the client never sees the answer).
 */
export class RecordingFetch {
  exchanges: RecordedExchange[] = [];
  failNextResponse = false;

  readonly fetch: FetchLike = async (input, init) => {
    const response = await fetch(input, init);
    const text = await response.text();
    this.exchanges.push({
      method: init?.method ?? "GET",
      url: String(input),
      requestBody: typeof init?.body === "string" ? init.body : "",
      responseBody: text,
      status: response.status,
    });
    if (this.failNextResponse) {
      this.failNextResponse = false;
      throw new TypeError("simulated network drop after server processing");
    }
    return new Response(text, {
      status: response.status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

export function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        server.close(() => reject(new Error("no port assigned")));
      }
    });
  });
}

export interface ServiceHandle {
  baseUrl: string;
  process: ChildProcess;
  stop(): void;
}

export async function startService(dataDir: string, port: number): Promise<ServiceHandle> {
  const child = spawn(
    "python3",
    ["-m", "auditbench.cli", "serve", "--data-dir", dataDir, "--port", String(port)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${baseUrl}/healthz`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      child.kill();
      throw new Error("service did not become healthy in time");
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  return {
    baseUrl,
    process: child,
    stop: () => {
      child.kill("SIGTERM");
    },
  };
}

export function runCli(args: string[]): Promise<{ stdout: string; code: number }> {
  return new Promise((resolve, reject) => {
    const child = spawn("python3", ["-m", "auditbench.cli", ...args], {
      stdio: ["ignore", "pipe", "pipe"],
    });
    let stdout = "";
    let stderr = "";
    child.stdout.on("data", (chunk) => (stdout += chunk));
    child.stderr.on("data", (chunk) => (stderr += chunk));
    child.on("close", (code) => {
      if (code === 0) resolve({ stdout, code });
      else reject(new Error(`cli ${args.join(" ")} failed (${code}): ${stderr}`));
    });
  });
}
