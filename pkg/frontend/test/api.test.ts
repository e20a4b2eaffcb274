import { describe, expect, it } from "vitest";

import { ApiError, QloanApi } from "../src/api.js";
import type { LoanSpecJson } from "../src/api.js";

const GERMAN_M2: LoanSpecJson = { d0: 100, M: 2, rate: { constant: 0.2 }, system: "german" };

interface Recorded {
  url: string;
  body: unknown;
}

function fakeServer(status: number, payload: unknown, log: Recorded[]) {
  return async (url: string, init?: RequestInit): Promise<Response> => {
    log.push({ url, body: init?.body ? JSON.parse(init.body as string) : null });
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => payload,
    } as Response;
  };
}

describe("request shapes", () => {
  it("rotate posts the loan with a sized angle vector", async () => {
    const log: Recorded[] = [];
    const api = new QloanApi("http://host", fakeServer(200, { ok: true }, log));
    await api.rotate(GERMAN_M2, [0.7], { geometric: { a: 1.1, u1: 1.1 } });
    expect(log[0].url).toBe("http://host/api/rotate");
    expect(log[0].body).toEqual({
      loan: GERMAN_M2,
      rotation: { dim: 2, angles: [0.7] },
      index: { geometric: { a: 1.1, u1: 1.1 } },
    });
  });

  it("design passes objective and optional plane restriction", async () => {
    const log: Recorded[] = [];
    const api = new QloanApi("", fakeServer(200, {}, log));
    await api.design(GERMAN_M2, { equalize: {} }, [[2, 3]]);
    expect(log[0].url).toBe("/api/design");
    expect(log[0].body).toEqual({
      loan: GERMAN_M2,
      objective: { equalize: {} },
      planes: [[2, 3]],
    });
  });

  it("region posts pattern, z and grid size", async () => {
    const log: Recorded[] = [];
    const api = new QloanApi("", fakeServer(200, {}, log));
    await api.region({ ...GERMAN_M2, M: 3 }, "--+", 0.6, 1.05, 40);
    expect(log[0].body).toEqual({
      loan: { ...GERMAN_M2, M: 3 },
      pattern: "--+",
      z: 0.6,
      a: 1.05,
      grid_n: 40,
    });
  });
});

describe("error envelopes", () => {
  it("surfaces code, message and status", async () => {
    const api = new QloanApi("", fakeServer(422, {
      error: { code: "trace_mismatch", message: "target sum differs" },
    }, []));
    const failure = api.design(GERMAN_M2, { target: [64, 64] });
    await expect(failure).rejects.toBeInstanceOf(ApiError);
    await expect(failure).rejects.toMatchObject({ code: "trace_mismatch", status: 422 });
  });
});
