/**
 * DOM-free orchestration between the session state and the API.
 *
 * The controller owns the request lifecycle: every rotate call gets a
 * sequence number; responses apply last-write-wins; errors land in the state
 * for the banner. Equalize goes through /api/design (restricted to unpaid
 * planes once payments were made) and feeds the returned angles straight back
 * through a rotate so the next render shows server numbers.
 */

import { ApiError, QloanApi } from "./api.js";
import type { DesignResponse } from "./api.js";
import {
  SessionState,
  anglesFromRegionCell,
  applyError,
  applyResponse,
  issueRequest,
  mergeAngles,
  unlockedPlanes,
  type Plane,
} from "./state.js";

export type StateListener = (state: SessionState) => void;

export class SessionController {
  private state: SessionState;

  constructor(
    private api: QloanApi,
    initial: SessionState,
    private listener: StateListener = () => {},
  ) {
    this.state = initial;
  }

  current(): SessionState {
    return this.state;
  }

  private update(next: SessionState): void {
    this.state = next;
    this.listener(next);
  }

  /** Issue a rotate for the accumulated angles; stale replies are dropped. */
  async refresh(): Promise<SessionState> {
    const { state, seq } = issueRequest(this.state);
    this.update(state);
    try {
      const snapshot = await this.api.rotate(state.loan, state.angles, state.index);
      this.update(applyResponse(this.state, seq, snapshot));
    } catch (err) {
      const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.update(applyError(this.state, seq, message));
    }
    return this.state;
  }

  /** Update state without touching the network (used by debounced sliders). */
  apply(next: SessionState): SessionState {
    this.update(next);
    return this.state;
  }

  async setState(next: SessionState): Promise<SessionState> {
    this.update(next);
    return this.refresh();
  }

  /** Equalize the unpaid part of the schedule and apply the returned angles. */
  async equalize(): Promise<DesignResponse> {
    const planes: Plane[] | undefined =
      this.state.paidThrough > 0
        ? unlockedPlanes(this.state.loan.M, this.state.paidThrough)
        : undefined;
    const design = await this.api.design(this.state.loan, { equalize: {} }, planes);
    await this.setState(mergeAngles(this.state, design.angles));
    return design;
  }

  /** Apply a clicked M=3 region cell (only valid before any payment locks). */
  async applyRegionCell(x: number, y: number, z: number): Promise<SessionState> {
    if (this.state.loan.M !== 3 || this.state.paidThrough > 0) return this.state;
    return this.setState(mergeAngles(this.state, anglesFromRegionCell(x, y, z)));
  }
}

/** Trailing-edge debounce for slider streams. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
  timers: { set: typeof setTimeout; clear: typeof clearTimeout } = {
    set: setTimeout,
    clear: clearTimeout,
  },
): (...args: A) => void {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (handle !== undefined) timers.clear(handle);
    handle = timers.set(() => fn(...args), waitMs);
  };
}
