/**
 * Lightweight 3-D point-cloud view: orbit camera, perspective projection,
 * painter-sorted points on a plain 2-D canvas. No GL context needed, which
 * keeps the view testable and the dependency set flat.
 */

import type { Vec3 } from "./protocol.js";
import type { TelemetryStore } from "./telemetry.js";
import type { Ctx2D } from "./render2d.js";

export class OrbitCamera {
  yaw = -0.7; // rad, around world z
  pitch = 0.45; // rad above the horizon
  dist = 12; // m from target
  target: Vec3 = [0, 0, 1];
  fov = 500; // projection constant, px

  rotate(dxPx: number, dyPx: number): void {
    this.yaw -= dxPx * 0.008;
    this.pitch = Math.max(
      -1.45,
      Math.min(1.45, this.pitch + dyPx * 0.008),
    );
  }

  zoom(factor: number): void {
    this.dist = Math.max(1, Math.min(80, this.dist * factor));
  }

  /** World -> camera frame (x right, y up, z depth into the screen). */
  toCamera(p: Vec3): Vec3 {
    const dx = p[0] - this.target[0];
    const dy = p[1] - this.target[1];
    const dz = p[2] - this.target[2];
    const cy = Math.cos(this.yaw);
    const sy = Math.sin(this.yaw);
    const cp = Math.cos(this.pitch);
    const sp = Math.sin(this.pitch);
    const x1 = cy * dx + sy * dy;
    const y1 = -sy * dx + cy * dy;
    const z2 = cp * x1 + sp * dz;
    const y2 = -sp * x1 + cp * dz;
    return [y1, y2, this.dist - z2];
  }

  /** Screen position plus depth; null when behind the camera. */
  project(p: Vec3, width: number, height: number): Vec3 | null {
    const [cx, cyUp, depth] = this.toCamera(p);
    if (depth < 0.2) return null;
    const s = this.fov / depth;
    return [width / 2 + cx * s, height / 2 - cyUp * s, depth];
  }
}

const DEPTH_SHADES = ["#9fb8d0", "#7590aa", "#536a82", "#3a4c5e"];

function shade(depth: number, dist: number): string {
  const band = Math.min(
    DEPTH_SHADES.length - 1,
    Math.max(0, Math.floor(((depth - dist * 0.4) / dist) * DEPTH_SHADES.length)),
  );
  return DEPTH_SHADES[band]!;
}

export interface CloudView {
  width: number;
  height: number;
  res: number; // map resolution, m (cells arrive as integer indices)
  followVehicle: boolean;
}

/** Draw the cloud, path and vehicle; camera follows the vehicle target. */
export function renderCloud(
  ctx: Ctx2D,
  cam: OrbitCamera,
  view: CloudView,
  store: TelemetryStore,
): void {
  if (view.followVehicle) cam.target = store.p;
  ctx.globalAlpha = 1;
  ctx.setLineDash([]);
  ctx.fillStyle = "#0b0e12";
  ctx.fillRect(0, 0, view.width, view.height);

  // Occupied cells plus the latest scan, painter-sorted back to front.
  const pts: Array<{ px: number; py: number; depth: number; size: number }> = [];
  for (const [key, state] of store.cells) {
    if (state !== 2) continue;
    const [i, j, k] = key.split(",").map(Number) as [number, number, number];
    const r = view.res;
    const proj = cam.project([i * r, j * r, k * r], view.width, view.height);
    if (proj) pts.push({ px: proj[0], py: proj[1], depth: proj[2], size: 3 });
  }
  for (const p of store.scan) {
    const proj = cam.project(p, view.width, view.height);
    if (proj) pts.push({ px: proj[0], py: proj[1], depth: proj[2], size: 2 });
  }
  pts.sort((a, b) => b.depth - a.depth);
  for (const p of pts) {
    ctx.fillStyle = shade(p.depth, cam.dist);
    ctx.fillRect(p.px - p.size / 2, p.py - p.size / 2, p.size, p.size);
  }

  // Reference path in 3-D.
  if (store.path && store.path.p_no_inf.length >= 2) {
    ctx.beginPath();
    let started = false;
    for (const wp of store.path.p_no_inf) {
      const proj = cam.project(wp, view.width, view.height);
      if (!proj) continue;
      if (!started) ctx.moveTo(proj[0], proj[1]);
      else ctx.lineTo(proj[0], proj[1]);
      started = true;
    }
    ctx.strokeStyle = "#ffd24d";
    ctx.lineWidth = 2;
    ctx.stroke();
  }

  const vp = cam.project(store.p, view.width, view.height);
  if (vp) {
    ctx.beginPath();
    ctx.arc(vp[0], vp[1], Math.max(3, 40 / vp[2]), 0, 2 * Math.PI);
    ctx.fillStyle = "#7ef0a0";
    ctx.fill();
  }
}
