/**
 * Typed client for the qloan HTTP API.
 *
 * The fetch function is injectable so the whole client is testable without a
 * server. Server errors arrive as {"error": {"code", "message"}} envelopes and
 * are rethrown as ApiError with the stable code attached.
 */

export interface RateJson {
  constant?: number;
  per_period?: number[];
}

export interface LoanSpecJson {
  d0: number;
  M: number;
  rate: RateJson;
  system: string | { fixed_installments: number[] } | { fixed_amortizations: number[] };
}

export type IndexModelJson =
  | { geometric: { a: number; u1: number } }
  | { power_law: { u0: number; alpha: number } }
  | { linear: { u0: number; slope: number } }
  | { explicit: number[] };

export type ObjectiveJson =
  | { equalize: Record<string, never> }
  | { target: number[] }
  | { cap: { period: number; value: number } };

export interface ScheduleJson {
  d: number[];
  a: number[];
  y: number[];
  q: number[];
  total_paid: number;
  total_amortized: number;
}

export interface RotateInvariants {
  trace_q: number;
  trace_q_rotated: number;
  trace_q_preserved: boolean;
  sum_amortization: number;
  d_final: number;
}

export interface RotateResponse {
  original: { q: number[]; a: number[]; y: number[]; d: number[] };
  rotated: { qbar: number[]; abar: number[]; ybar: number[]; dbar: number[]; risk?: number[] };
  deltas: number[];
  debt_peak: { n: number; value: number } | null;
  invariants: RotateInvariants;
}

export interface ScheduleResponse {
  schedule: ScheduleJson;
  currency?: ScheduleJson;
  u?: number[];
  debt_peak?: { n: number; value: number } | null;
  invariants: { trace_q: number; sum_amortization: number; d_final: number };
}

export interface DesignResponse {
  angles: number[];
  achieved: number[];
  residual: number;
  status: string;
}

export interface RegionResponse {
  x: number[];
  y: number[];
  feasible: number[][];
  feasible_count: number;
  pattern: string;
  z: number;
}

export class ApiError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class QloanApi {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      const err = payload?.error ?? { code: "unknown", message: "request failed" };
      throw new ApiError(err.code, err.message, response.status);
    }
    return payload as T;
  }

  health(): Promise<{ status: string }> {
    return this.fetchFn(this.baseUrl + "/api/health").then((r) => r.json());
  }

  schedule(loan: LoanSpecJson, index?: IndexModelJson | null): Promise<ScheduleResponse> {
    return this.post("/api/schedule", { loan, index: index ?? undefined });
  }

  rotate(
    loan: LoanSpecJson,
    angles: number[],
    index?: IndexModelJson | null,
  ): Promise<RotateResponse> {
    return this.post("/api/rotate", {
      loan,
      rotation: { dim: loan.M, angles },
      index: index ?? undefined,
    });
  }

  design(
    loan: LoanSpecJson,
    objective: ObjectiveJson,
    planes?: Array<[number, number]>,
  ): Promise<DesignResponse> {
    return this.post("/api/design", { loan, objective, planes });
  }

  region(
    loan: LoanSpecJson,
    pattern: string,
    z: number,
    a?: number,
    gridN = 80,
  ): Promise<RegionResponse> {
    return this.post("/api/region", { loan, pattern, z, a, grid_n: gridN });
  }
}
