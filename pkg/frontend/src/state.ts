/**
 * Session state for a live restructuring.
 *
 * The session accumulates one angle per rotation plane. Once a payment is
 * made its period is locked: only planes whose BOTH periods are still unpaid
 * may change afterwards, which is exactly the subgroup restriction that keeps
 * every locked period's rotated payment fixed on the server. Responses are
 * applied last-write-wins through sequence numbers so a slow reply can never
 * clobber a newer one.
 */

import type { IndexModelJson, LoanSpecJson, RotateResponse } from "./api.js";

export type Plane = [number, number];

export interface SessionState {
  loan: LoanSpecJson;
  index: IndexModelJson | null;
  angles: number[];
  paidThrough: number; // periods 1..paidThrough are locked
  snapshot: RotateResponse | null;
  lastError: string | null;
  issuedSeq: number;
  appliedSeq: number;
}

export function generatorCount(m: number): number {
  return (m * (m - 1)) / 2;
}

/** Lexicographic plane list (1-based), matching the server's angle layout. */
export function planeOrder(m: number): Plane[] {
  const planes: Plane[] = [];
  for (let i = 1; i <= m; i++) {
    for (let j = i + 1; j <= m; j++) planes.push([i, j]);
  }
  return planes;
}

export function planeIndex(m: number, plane: Plane): number {
  return planeOrder(m).findIndex(([i, j]) => i === plane[0] && j === plane[1]);
}

/** Planes that only touch unpaid periods; adjusting them cannot move paid payments. */
export function unlockedPlanes(m: number, paidThrough: number): Plane[] {
  return planeOrder(m).filter(([i]) => i > paidThrough);
}

export function isUnlocked(m: number, paidThrough: number, plane: Plane): boolean {
  return plane[0] > paidThrough && plane[1] > paidThrough;
}

export function newSession(loan: LoanSpecJson, index: IndexModelJson | null = null): SessionState {
  return {
    loan,
    index,
    angles: new Array(generatorCount(loan.M)).fill(0),
    paidThrough: 0,
    snapshot: null,
    lastError: null,
    issuedSeq: 0,
    appliedSeq: 0,
  };
}

/** Set one plane angle; locked planes are refused and the state returned unchanged. */
export function withAngle(state: SessionState, plane: Plane, value: number): SessionState {
  if (!isUnlocked(state.loan.M, state.paidThrough, plane)) return state;
  const idx = planeIndex(state.loan.M, plane);
  if (idx < 0) return state;
  const angles = state.angles.slice();
  angles[idx] = value;
  return { ...state, angles };
}

/** Merge a full angle vector, keeping locked planes at their current values. */
export function mergeAngles(state: SessionState, incoming: number[]): SessionState {
  const planes = planeOrder(state.loan.M);
  const angles = state.angles.slice();
  planes.forEach((plane, idx) => {
    if (isUnlocked(state.loan.M, state.paidThrough, plane)) angles[idx] = incoming[idx];
  });
  return { ...state, angles };
}

/** Back to the identity on every still-adjustable plane. */
export function resetAngles(state: SessionState): SessionState {
  return mergeAngles(state, new Array(state.angles.length).fill(0));
}

/** Mark the next payment as made, locking its period. */
export function advancePeriod(state: SessionState): SessionState {
  return { ...state, paidThrough: Math.min(state.paidThrough + 1, state.loan.M) };
}

export function issueRequest(state: SessionState): { state: SessionState; seq: number } {
  const seq = state.issuedSeq + 1;
  return { state: { ...state, issuedSeq: seq }, seq };
}

/** Apply a response unless a newer one has already landed. */
export function applyResponse(
  state: SessionState,
  seq: number,
  snapshot: RotateResponse,
): SessionState {
  if (seq <= state.appliedSeq) return state; // stale reply, discard
  return { ...state, appliedSeq: seq, snapshot, lastError: null };
}

export function applyError(state: SessionState, seq: number, message: string): SessionState {
  if (seq <= state.appliedSeq) return state;
  return { ...state, appliedSeq: seq, lastError: message };
}

/** Angle vector for an M=3 region cell: x = sin(phi), grid z = sin(gamma), y = sin(theta). */
export function anglesFromRegionCell(x: number, y: number, z: number): number[] {
  return [Math.asin(x), Math.asin(z), Math.asin(y)];
}
