/**
 * In-process HTTP stub with the same routes and error bodies as the real
 * service. Responses come from captured fixtures; annotation writes run a
 * real compare-and-set so conflict behaviour can be exercised end to end.
 */

import { readFileSync } from "node:fs";
import { createServer, type Server } from "node:http";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { AnnotationDoc, PutAnnotationBody } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8"));
}

const TOKENS: Record<string, { principal: string; operator: boolean }> = {
  "tok-op": { principal: "op", operator: true },
  "tok-ann": { principal: "ann", operator: false },
  "tok-ben": { principal: "ben", operator: false },
};

export interface StubState {
  records: Map<string, AnnotationDoc>;
  putCount: number;
}

export interface RunningStub {
  server: Server;
  baseUrl: string;
  state: StubState;
  close(): Promise<void>;
}

interface Reply {
  status: number;
  body: unknown;
}

function reply(status: number, body: unknown): Reply {
  return { status, body };
}

function denied(status: number, message: string): Reply {
  return reply(status, {
    error: status === 401 ? "unauthenticated" : "denied",
    message,
  });
}

function recordKey(round: string, reviewer: string, summary: string): string {
  return `${round}/${reviewer}/${summary}`;
}

function handle(
  state: StubState,
  method: string,
  rawUrl: string,
  token: string | null,
  body: string,
): Reply {
  const url = new URL(rawUrl, "http://stub");
  const path = url.pathname;
  const auth = token ? TOKENS[token] : undefined;
  if (!auth) {
    return denied(401, "missing or unknown bearer token");
  }

  if (method === "GET") {
    if (path === "/api/taxonomy/3") {
      return reply(200, fixture("taxonomy_v3.json"));
    }
    if (path === "/api/scales") {
      return reply(200, fixture("scales.json"));
    }
    if (path === "/api/rounds") {
      return reply(200, fixture("rounds.json"));
    }
    if (path === "/api/summaries/s000") {
      return reply(200, fixture("summary_s000.json"));
    }
    if (path === "/api/rounds/r1/reports/agreement") {
      const stage = url.searchParams.get("stage") ?? "1";
      return reply(200, fixture(`agreement_stage${stage}.json`));
    }
    if (path === "/api/rounds/r1/reports/risk") {
      return reply(200, fixture("risk.json"));
    }
    const annotation = path.match(
      /^\/api\/rounds\/(\w+)\/annotations\/(\w+)\/(\w+)$/,
    );
    if (annotation) {
      const [, round, reviewer, summary] = annotation;
      if (!auth.operator && auth.principal !== reviewer) {
        return denied(403, "blinded round");
      }
      const doc = state.records.get(recordKey(round!, reviewer!, summary!));
      if (!doc) {
        return reply(404, {
          error: "not_found",
          message: `no annotation for ${summary}`,
        });
      }
      return reply(200, doc);
    }
    const assignments = path.match(/^\/api\/rounds\/(\w+)\/assignments/);
    if (assignments) {
      const round = assignments[1]!;
      const items = [...state.records.entries()]
        .filter(([key]) => key.startsWith(`${round}/${auth.principal}/`))
        .map(([key, doc]) => ({
          summary_id: key.split("/")[2]!,
          record_version: doc.record_version,
          submitted: doc.submitted,
        }));
      return reply(200, {
        round_id: round,
        reviewer_id: auth.principal,
        round_status: "open",
        taxonomy_version: 3,
        progress: 0,
        assignments: items.length
          ? items
          : [{ summary_id: "s000", record_version: 0, submitted: false }],
      });
    }
    return reply(404, { error: "not_found", message: `no route ${path}` });
  }

  if (method === "PUT") {
    const match = path.match(
      /^\/api\/rounds\/(\w+)\/annotations\/(\w+)\/(\w+)$/,
    );
    if (!match) {
      return reply(404, { error: "not_found", message: `no route ${path}` });
    }
    const [, round, reviewer, summary] = match;
    if (!auth.operator && auth.principal !== reviewer) {
      return denied(403, "cannot write another reviewer's record");
    }
    const parsed = JSON.parse(body) as PutAnnotationBody;
    const key = recordKey(round!, reviewer!, summary!);
    const current = state.records.get(key)?.record_version ?? 0;
    if (parsed.expected_version !== current) {
      return reply(409, {
        error: "conflict",
        message: "record was modified by a newer write",
        context: { expected: parsed.expected_version, actual: current },
      });
    }
    state.putCount += 1;
    const next: AnnotationDoc = {
      round_id: round!,
      reviewer_id: reviewer!,
      summary_id: summary!,
      flags: parsed.flags,
      instances: parsed.instances,
      record_version: current + 1,
      submitted: parsed.submitted,
    };
    state.records.set(key, next);
    return reply(200, {
      record_version: next.record_version,
      submitted: next.submitted,
    });
  }

  if (method === "POST" && path === "/api/sus") {
    const parsed = JSON.parse(body) as { evaluator_id: string };
    return reply(200, {
      evaluator_id: parsed.evaluator_id,
      score: 75.0,
      grade: "B",
      label: "Good",
    });
  }

  return reply(404, { error: "not_found", message: `no route ${path}` });
}

export function startStub(): Promise<RunningStub> {
  const state: StubState = { records: new Map(), putCount: 0 };
  const server = createServer((req, res) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk: Buffer) => chunks.push(chunk));
    req.on("end", () => {
      const token =
        req.headers.authorization?.replace(/^Bearer\s+/i, "") ?? null;
      const { status, body } = handle(
        state,
        req.method ?? "GET",
        req.url ?? "/",
        token,
        Buffer.concat(chunks).toString("utf8"),
      );
      res.writeHead(status, { "content-type": "application/json" });
      res.end(JSON.stringify(body));
    });
  });
  return new Promise((resolve) => {
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        throw new Error("stub failed to bind a port");
      }
      resolve({
        server,
        baseUrl: `http://127.0.0.1:${address.port}`,
        state,
        close: () =>
          new Promise((done) => {
            server.close(() => done());
          }),
      });
    });
  });
}
