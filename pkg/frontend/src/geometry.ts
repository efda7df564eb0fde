/**
 * Halfplane intersection for the altitude-slice view.
 *
 * The corridor arrives as rows of C x <= d in 3-D; slicing at the vehicle
 * altitude turns each row into a 2-D halfplane, and successive polygon
 * clipping against a large bounding square yields the drawable polygon.
 */

import type { Vec3 } from "./protocol.js";

export type Vec2 = [number, number];

export interface Halfplane {
  a: Vec2; // normal
  b: number; // offset: keep a . p <= b
}

const EPS = 1e-12;

/** Clip a convex polygon against one halfplane (Sutherland-Hodgman). */
export function clipPolygon(poly: Vec2[], plane: Halfplane): Vec2[] {
  if (poly.length === 0) return [];
  const [ax, ay] = plane.a;
  const out: Vec2[] = [];
  for (let i = 0; i < poly.length; i++) {
    const p = poly[i]!;
    const q = poly[(i + 1) % poly.length]!;
    const fp = ax * p[0] + ay * p[1] - plane.b;
    const fq = ax * q[0] + ay * q[1] - plane.b;
    if (fp <= EPS) out.push(p);
    if ((fp < -EPS && fq > EPS) || (fp > EPS && fq < -EPS)) {
      const t = fp / (fp - fq);
      out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
    }
  }
  return out;
}

/** Intersect halfplanes into a convex polygon; [] when empty. */
export function halfplanePolygon(planes: Halfplane[], bound = 1e6): Vec2[] {
  let poly: Vec2[] = [
    [-bound, -bound],
    [bound, -bound],
    [bound, bound],
    [-bound, bound],
  ];
  for (const plane of planes) {
    poly = clipPolygon(poly, plane);
    if (poly.length === 0) return [];
  }
  return poly;
}

/**
 * Slice the corridor at altitude z. Rows whose normal is (near) pure-z
 * become all-of-plane or empty at this altitude; the rest project to 2-D.
 */
export function sfcSlicePolygon(
  C: Vec3[],
  d: number[],
  z: number,
  bound = 1e6,
): Vec2[] {
  const planes: Halfplane[] = [];
  for (let i = 0; i < C.length; i++) {
    const row = C[i]!;
    const b = (d[i] ?? 0) - row[2] * z;
    const norm = Math.hypot(row[0], row[1]);
    if (norm < 1e-9) {
      if (b < 0) return []; // slice altitude outside the corridor
      continue;
    }
    planes.push({ a: [row[0], row[1]], b });
  }
  return halfplanePolygon(planes, bound);
}

/** Convex polygon area (shoelace); vertices in either winding. */
export function polygonArea(poly: Vec2[]): number {
  let acc = 0;
  for (let i = 0; i < poly.length; i++) {
    const p = poly[i]!;
    const q = poly[(i + 1) % poly.length]!;
    acc += p[0] * q[1] - q[0] * p[1];
  }
  return Math.abs(acc) / 2;
}

export function pointInPolygon(pt: Vec2, poly: Vec2[]): boolean {
  // Convex, consistent winding: inside iff on one side of every edge.
  let sign = 0;
  for (let i = 0; i < poly.length; i++) {
    const p = poly[i]!;
    const q = poly[(i + 1) % poly.length]!;
    const cross = (q[0] - p[0]) * (pt[1] - p[1]) - (q[1] - p[1]) * (pt[0] - p[0]);
    if (Math.abs(cross) < EPS) continue;
    const s = Math.sign(cross);
    if (sign === 0) sign = s;
    else if (s !== sign) return false;
  }
  return true;
}
