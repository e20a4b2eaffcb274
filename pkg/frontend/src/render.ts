/**
 * Pure renderers: every function returns a markup string, so the view layer
 * is testable without a browser. All displayed numbers come from server
 * responses; nothing financial is recomputed here.
 */

import type { RegionResponse, RotateInvariants } from "./api.js";

const BAR_W = 22;
const PAIR_GAP = 6;
const GROUP_GAP = 26;
const CHART_H = 180;

export function fmt(value: number): string {
  return Number(value.toPrecision(6)).toString();
}

export interface BarSeries {
  label: string;
  original: number[];
  rotated: number[];
  lockedThrough: number;
}

/** Side-by-side original/rotated bars, one pair per period. */
export function renderBars(series: BarSeries): string {
  const n = series.original.length;
  const peak = Math.max(...series.original, ...series.rotated, 1e-12);
  const width = n * (2 * BAR_W + PAIR_GAP + GROUP_GAP) + GROUP_GAP;
  const parts: string[] = [];
  for (let k = 0; k < n; k++) {
    const x0 = GROUP_GAP + k * (2 * BAR_W + PAIR_GAP + GROUP_GAP);
    const locked = k < series.lockedThrough ? " locked" : "";
    const hOrig = (series.original[k] / peak) * CHART_H;
    const hRot = (series.rotated[k] / peak) * CHART_H;
    parts.push(
      `<rect class="bar original${locked}" data-period="${k + 1}" x="${x0}" ` +
        `y="${fmt(CHART_H - hOrig)}" width="${BAR_W}" height="${fmt(hOrig)}"></rect>`,
      `<rect class="bar rotated${locked}" data-period="${k + 1}" x="${x0 + BAR_W + PAIR_GAP}" ` +
        `y="${fmt(CHART_H - hRot)}" width="${BAR_W}" height="${fmt(hRot)}"></rect>`,
      `<text class="tick" x="${x0 + BAR_W}" y="${CHART_H + 14}">${k + 1}</text>`,
    );
  }
  return (
    `<figure class="series"><figcaption>${series.label}</figcaption>` +
    `<svg viewBox="0 0 ${width} ${CHART_H + 20}" role="img">${parts.join("")}</svg></figure>`
  );
}

function badge(ok: boolean): string {
  return ok ? `<span class="badge pass">pass</span>` : `<span class="badge fail">fail</span>`;
}

/**
 * Invariant panel. Values and the trace verdict are the server's own; the
 * panel renders them verbatim.
 */
export function renderInvariants(inv: RotateInvariants): string {
  return (
    `<dl class="invariants">` +
    `<dt>total paid (original)</dt><dd>${fmt(inv.trace_q)}</dd>` +
    `<dt>total paid (rotated)</dt><dd>${fmt(inv.trace_q_rotated)} ${badge(inv.trace_q_preserved)}</dd>` +
    `<dt>total amortized</dt><dd>${fmt(inv.sum_amortization)}</dd>` +
    `<dt>final debt</dt><dd>${fmt(inv.d_final)}</dd>` +
    `</dl>`
  );
}

export function renderError(message: string | null): string {
  return message ? `<div class="error-banner">${escapeHtml(message)}</div>` : "";
}

export function renderDebtPeak(peak: { n: number; value: number } | null | undefined): string {
  if (!peak) return "";
  return `<p class="peak-note">currency debt peaks at period ${peak.n} (${fmt(peak.value)})</p>`;
}

/** Feasibility heatmap; cells carry data-x/data-y so the shell can wire clicks. */
export function renderRegion(region: RegionResponse): string {
  if (region.feasible_count === 0) {
    return `<div class="region-empty">no feasible cells for pattern ${region.pattern} at z=${fmt(region.z)}</div>`;
  }
  const nx = region.x.length;
  const ny = region.y.length;
  const cell = 4;
  const cells: string[] = [];
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      if (!region.feasible[iy][ix]) continue;
      cells.push(
        `<rect class="cell feasible" data-x="${region.x[ix]}" data-y="${region.y[iy]}" ` +
          `x="${ix * cell}" y="${(ny - 1 - iy) * cell}" width="${cell}" height="${cell}"></rect>`,
      );
    }
  }
  return (
    `<svg class="region" viewBox="0 0 ${nx * cell} ${ny * cell}" role="img">` +
    `<rect class="region-bg" x="0" y="0" width="${nx * cell}" height="${ny * cell}"></rect>` +
    cells.join("") +
    `</svg>`
  );
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
