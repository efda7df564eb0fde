/**
 * Top-down altitude-slice view on a plain 2-D canvas.
 *
 * World x points up the screen, world y points left, i.e. the usual
 * "north-up" top-down convention with the vehicle heading drawn from yaw.
 */

import { sfcSlicePolygon, type Vec2 } from "./geometry.js";
import type { TelemetryStore } from "./telemetry.js";

/** Subset of CanvasRenderingContext2D used here; tests pass a recorder. */
export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  setLineDash(segments: number[]): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface SliceView {
  width: number;
  height: number;
  scale: number; // px per metre
  res: number; // map resolution, m
  d0: number; // clearance color threshold, m
  followVehicle: boolean;
  center: Vec2; // world coords at canvas center when not following
}

export function defaultView(width: number, height: number): SliceView {
  return {
    width,
    height,
    scale: 60,
    res: 0.1,
    d0: 0.9,
    followVehicle: true,
    center: [0, 0],
  };
}

const COLORS = {
  background: "#11151a",
  grid: "#1e2630",
  occupied: "#8a4a4a",
  free: "#1c2e24",
  sfcFill: "rgba(80, 170, 255, 0.12)",
  sfcEdge: "#50aaff",
  pathInf: "#ff5f5f",
  pathNoInf: "#ffd24d",
  goal: "#ffd24d",
  vehicle: "#7ef0a0",
  scan: "#c8d2dc",
  text: "#e6edf3",
  ok: "#7ef0a0",
  warn: "#ffba42",
  danger: "#ff5f5f",
  badge: "#ff5f5f",
};

function mapper(view: SliceView, store: TelemetryStore) {
  const c: Vec2 = view.followVehicle ? [store.p[0], store.p[1]] : view.center;
  const { width, height, scale } = view;
  return (x: number, y: number): Vec2 => [
    width / 2 - (y - c[1]) * scale,
    height / 2 - (x - c[0]) * scale,
  ];
}

function polyline(ctx: Ctx2D, pts: Vec2[], close = false): void {
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  if (close) ctx.closePath();
}

export function clearanceColor(clearance: number, d0: number): string {
  if (clearance >= d0) return COLORS.ok;
  if (clearance >= d0 / 2) return COLORS.warn;
  return COLORS.danger;
}

/** Draw the whole slice frame; safe to call with an empty store. */
export function renderSlice(
  ctx: Ctx2D,
  view: SliceView,
  store: TelemetryStore,
  nowMs: number,
): void {
  const toPx = mapper(view, store);
  ctx.globalAlpha = 1;
  ctx.setLineDash([]);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, view.width, view.height);

  // Occupancy slice at the vehicle altitude; cell i spans (i +- 0.5) res.
  const cellPx = view.res * view.scale;
  for (const cell of store.sliceCells(store.p[2], view.res)) {
    const [px, py] = toPx((cell.i + 0.5) * view.res, (cell.j + 0.5) * view.res);
    ctx.fillStyle = cell.state === 2 ? COLORS.occupied : COLORS.free;
    ctx.fillRect(px, py, cellPx, cellPx);
  }

  // Corridor polygon at the slice altitude.
  if (store.sfc) {
    const poly = sfcSlicePolygon(store.sfc.C, store.sfc.d, store.p[2]);
    if (poly.length >= 3) {
      polyline(ctx, poly.map(([x, y]) => toPx(x, y)), true);
      ctx.fillStyle = COLORS.sfcFill;
      ctx.fill();
      ctx.strokeStyle = COLORS.sfcEdge;
      ctx.lineWidth = 1.5;
      ctx.stroke();
    }
  }

  // Reference path; the escape segment gets a dashed, hotter stroke.
  if (store.path) {
    if (store.path.p_inf.length >= 2) {
      polyline(ctx, store.path.p_inf.map((p) => toPx(p[0], p[1])));
      ctx.setLineDash([6, 4]);
      ctx.strokeStyle = COLORS.pathInf;
      ctx.lineWidth = 2;
      ctx.stroke();
      ctx.setLineDash([]);
    }
    if (store.path.p_no_inf.length >= 2) {
      polyline(ctx, store.path.p_no_inf.map((p) => toPx(p[0], p[1])));
      ctx.strokeStyle = COLORS.pathNoInf;
      ctx.lineWidth = 2;
      ctx.stroke();
    }
    const [gx, gy] = toPx(store.path.goal[0], store.path.goal[1]);
    ctx.beginPath();
    ctx.arc(gx, gy, 5, 0, 2 * Math.PI);
    ctx.strokeStyle = COLORS.goal;
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }

  // Latest scan points.
  ctx.fillStyle = COLORS.scan;
  for (const pt of store.scan) {
    const [px, py] = toPx(pt[0], pt[1]);
    ctx.fillRect(px - 1, py - 1, 2, 2);
  }

  // Vehicle glyph: body circle plus heading tick.
  const [vx, vy] = toPx(store.p[0], store.p[1]);
  ctx.beginPath();
  ctx.arc(vx, vy, 7, 0, 2 * Math.PI);
  ctx.fillStyle = COLORS.vehicle;
  ctx.fill();
  const hx = vx - Math.sin(store.yaw) * 14;
  const hy = vy - Math.cos(store.yaw) * 14;
  ctx.beginPath();
  ctx.moveTo(vx, vy);
  ctx.lineTo(hx, hy);
  ctx.strokeStyle = COLORS.vehicle;
  ctx.lineWidth = 2;
  ctx.stroke();

  // HUD: clearance readout colored against d0, then health badges.
  ctx.font = "14px monospace";
  const clr = Number.isFinite(store.clearance)
    ? `clearance ${store.clearance.toFixed(2)} m`
    : "clearance inf";
  ctx.fillStyle = clearanceColor(store.clearance, view.d0);
  ctx.fillText(clr, 10, 20);

  ctx.fillStyle = COLORS.text;
  if (store.t !== null) ctx.fillText(`t ${store.t.toFixed(2)} s`, 10, 38);

  let badgeY = 56;
  if (store.isStale(nowMs)) {
    ctx.fillStyle = COLORS.badge;
    const age = ((nowMs - (store.lastRxMs ?? nowMs)) / 1000).toFixed(1);
    ctx.fillText(`STALE ${age}s`, 10, badgeY);
    badgeY += 18;
  }
  if (store.hasRecentError(nowMs)) {
    ctx.fillStyle = COLORS.badge;
    ctx.fillText(`BAD FRAME x${store.malformed}`, 10, badgeY);
    badgeY += 18;
  }
  const lastEvent = store.events[store.events.length - 1];
  if (lastEvent) {
    ctx.fillStyle = COLORS.warn;
    ctx.fillText(`${lastEvent.name} @ ${lastEvent.t.toFixed(1)}s`, 10, badgeY);
  }
}
