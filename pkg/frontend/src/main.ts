/**
 * Browser shell: wires the DOM to the controller. All numbers on screen come
 * from API responses; this file only moves strings around.
 */

import { QloanApi } from "./api.js";
import type { LoanSpecJson, RegionResponse } from "./api.js";
import { SessionController, debounce } from "./controller.js";
import { renderBars, renderDebtPeak, renderError, renderInvariants, renderRegion } from "./render.js";
import {
  SessionState,
  advancePeriod,
  newSession,
  planeIndex,
  resetAngles,
  unlockedPlanes,
  withAngle,
  type Plane,
} from "./state.js";

const MAX_SLIDER_PLANES = 15; // M <= 6 shows every plane as its own slider

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readLoan(): LoanSpecJson {
  return {
    d0: Number((el<HTMLInputElement>("d0")).value),
    M: Number((el<HTMLInputElement>("periods")).value),
    rate: { constant: Number((el<HTMLInputElement>("rate")).value) },
    system: (el<HTMLSelectElement>("system")).value,
  };
}

function readIndex(): { geometric: { a: number; u1: number } } | null {
  const a = Number((el<HTMLInputElement>("inflation")).value);
  return a && a !== 1 ? { geometric: { a, u1: a } } : null;
}

const api = new QloanApi("");
let controller = new SessionController(api, newSession(readLoan(), readIndex()), render);

function render(state: SessionState): void {
  el("error").innerHTML = renderError(state.lastError);
  const snap = state.snapshot;
  if (!snap) return;
  const locked = state.paidThrough;
  el("charts").innerHTML =
    renderBars({ label: "installments q", original: snap.original.q,
                 rotated: snap.rotated.qbar, lockedThrough: locked }) +
    renderBars({ label: "amortizations a", original: snap.original.a,
                 rotated: snap.rotated.abar, lockedThrough: locked }) +
    renderBars({ label: "debt d", original: snap.original.d,
                 rotated: snap.rotated.dbar, lockedThrough: locked });
  el("invariants").innerHTML = renderInvariants(snap.invariants) + renderDebtPeak(snap.debt_peak);
  el("paid-note").textContent =
    locked > 0 ? `payments made through period ${locked}; those bars are frozen` : "";
}

function renderSliders(state: SessionState): void {
  const planes = unlockedPlanes(state.loan.M, state.paidThrough);
  const host = el("sliders");
  host.innerHTML = "";
  const asSliders = planes.length <= MAX_SLIDER_PLANES ? planes : [];
  for (const plane of asSliders) {
    host.appendChild(sliderRow(state, plane));
  }
  if (asSliders.length === 0 && planes.length > 0) {
    host.appendChild(planePicker(state, planes));
  }
}

function sliderRow(state: SessionState, plane: Plane): HTMLElement {
  const row = document.createElement("label");
  row.className = "slider-row";
  const idx = planeIndex(state.loan.M, plane);
  row.innerHTML =
    `<span>plane (${plane[0]},${plane[1]})</span>` +
    `<input type="range" min="-1.5707963" max="1.5707963" step="0.01" value="${state.angles[idx]}">` +
    `<code>${state.angles[idx].toFixed(2)}</code>`;
  const input = row.querySelector("input")!;
  const code = row.querySelector("code")!;
  const push = debounce(() => void controller.refresh(), 150);
  input.addEventListener("input", () => {
    const value = Number(input.value);
    code.textContent = value.toFixed(2);
    controller.apply(withAngle(controller.current(), plane, value));
    push();
  });
  return row;
}

function planePicker(state: SessionState, planes: Plane[]): HTMLElement {
  // large M: one named subgroup plane at a time
  const wrap = document.createElement("div");
  wrap.className = "plane-picker";
  const select = document.createElement("select");
  for (const plane of planes) {
    const option = document.createElement("option");
    option.value = `${plane[0]},${plane[1]}`;
    option.textContent = `plane (${plane[0]},${plane[1]})`;
    select.appendChild(option);
  }
  const slider = document.createElement("input");
  slider.type = "range";
  slider.min = "-1.5707963";
  slider.max = "1.5707963";
  slider.step = "0.01";
  slider.value = "0";
  slider.addEventListener("input", () => {
    const [i, j] = select.value.split(",").map(Number) as [number, number];
    void controller.setState(withAngle(controller.current(), [i, j], Number(slider.value)));
  });
  wrap.append(select, slider);
  return wrap;
}

async function rebuildSession(): Promise<void> {
  controller = new SessionController(api, newSession(readLoan(), readIndex()), render);
  renderSliders(controller.current());
  await controller.refresh();
  await refreshRegion();
}

async function refreshRegion(): Promise<void> {
  const host = el("region");
  const state = controller.current();
  if (state.loan.M !== 3) {
    host.innerHTML = `<p class="region-note">region explorer needs M = 3</p>`;
    return;
  }
  const z = Number(el<HTMLInputElement>("region-z").value);
  const a = Number(el<HTMLInputElement>("inflation").value) || undefined;
  try {
    const region: RegionResponse = await api.region(state.loan, "--+", z, a);
    host.innerHTML = renderRegion(region);
    for (const cell of host.querySelectorAll<SVGRectElement>(".cell.feasible")) {
      cell.addEventListener("click", () => {
        const x = Number(cell.dataset.x);
        const y = Number(cell.dataset.y);
        void controller.applyRegionCell(x, y, z).then(() => renderSliders(controller.current()));
      });
    }
  } catch (err) {
    host.innerHTML = renderError(String(err));
  }
}

function wire(): void {
  el("apply-loan").addEventListener("click", () => void rebuildSession());
  el("reset").addEventListener("click", () => {
    void controller.setState(resetAngles(controller.current())).then(() =>
      renderSliders(controller.current()));
  });
  el("equalize").addEventListener("click", () => {
    void controller.equalize().then(() => renderSliders(controller.current()));
  });
  el("mark-paid").addEventListener("click", () => {
    void controller.setState(advancePeriod(controller.current())).then(() =>
      renderSliders(controller.current()));
  });
  el("region-z").addEventListener("change", () => void refreshRegion());
  void rebuildSession();
}

wire();
