/** Minimal 3D wireframe viewer math: orbit camera, perspective projection,
 * and mesh edge assembly from the service's graph + embedding. No DOM. */

import type { EmbeddingJson, GraphJson, Vec2, Vec3 } from "./types.js";

export interface Camera {
  target: Vec3;
  distance: number;
  /** Radians around +z; 0 looks along +y toward the target. */
  yaw: number;
  /** Radians above the xy plane, clamped to (-pi/2, pi/2). */
  pitch: number;
  /** Vertical field of view in radians. */
  fov: number;
}

export const PITCH_LIMIT = Math.PI / 2 - 0.01;

export function orbit(cam: Camera, dYaw: number, dPitch: number): Camera {
  const pitch = Math.max(-PITCH_LIMIT, Math.min(PITCH_LIMIT, cam.pitch + dPitch));
  return { ...cam, yaw: cam.yaw + dYaw, pitch };
}

export function zoom(cam: Camera, factor: number): Camera {
  return { ...cam, distance: Math.max(1e-6, cam.distance * factor) };
}

export function eyePosition(cam: Camera): Vec3 {
  const c = Math.cos(cam.pitch);
  return [
    cam.target[0] + cam.distance * c * Math.sin(cam.yaw),
    cam.target[1] - cam.distance * c * Math.cos(cam.yaw),
    cam.target[2] + cam.distance * Math.sin(cam.pitch),
  ];
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function normalize(a: Vec3): Vec3 {
  const n = Math.hypot(a[0], a[1], a[2]) || 1;
  return [a[0] / n, a[1] / n, a[2] / n];
}

export interface Viewport {
  width: number;
  height: number;
}

/** Project a world point to pixel coordinates plus view depth; null when the
 * point is behind the eye. */
export function projectPoint(
  cam: Camera,
  p: Vec3,
  viewport: Viewport,
): { x: number; y: number; depth: number } | null {
  const eye = eyePosition(cam);
  const forward = normalize(sub(cam.target, eye));
  const right = normalize(cross(forward, [0, 0, 1]));
  const up = cross(right, forward);
  const rel = sub(p, eye);
  const depth = dot(rel, forward);
  if (depth <= 1e-9) return null;
  const fscale = viewport.height / (2 * Math.tan(cam.fov / 2));
  return {
    x: viewport.width / 2 + (dot(rel, right) / depth) * fscale,
    y: viewport.height / 2 - (dot(rel, up) / depth) * fscale,
    depth,
  };
}

function point3(coords: number[]): Vec3 {
  return [coords[0] ?? 0, coords[1] ?? 0, coords[2] ?? 0];
}

/** Unique edges of the face cycles, each as a pair of world points. */
export function meshEdges(
  graph: GraphJson,
  embedding: EmbeddingJson,
): [Vec3, Vec3][] {
  const seen = new Set<string>();
  const out: [Vec3, Vec3][] = [];
  for (const face of graph.faces) {
    for (let i = 0; i < face.length; i++) {
      const a = face[i]!;
      const b = face[(i + 1) % face.length]!;
      const key = a < b ? `${a},${b}` : `${b},${a}`;
      if (seen.has(key)) continue;
      seen.add(key);
      out.push([point3(embedding[String(a)] ?? []), point3(embedding[String(b)] ?? [])]);
    }
  }
  return out;
}

/** Camera centered on the embedding's bounding box, pulled back far enough
 * to frame the whole roof. */
export function fitCamera(embedding: EmbeddingJson, fov = Math.PI / 4): Camera {
  const pts = Object.values(embedding).map(point3);
  if (pts.length === 0) {
    return { target: [0, 0, 0], distance: 10, yaw: 0.6, pitch: 0.5, fov };
  }
  const lo: Vec3 = [...pts[0]!];
  const hi: Vec3 = [...pts[0]!];
  const lom = lo as unknown as number[];
  const him = hi as unknown as number[];
  for (const p of pts) {
    for (let c = 0; c < 3; c++) {
      lom[c] = Math.min(lom[c]!, p[c]!);
      him[c] = Math.max(him[c]!, p[c]!);
    }
  }
  const target: Vec3 = [
    (lo[0] + hi[0]) / 2,
    (lo[1] + hi[1]) / 2,
    (lo[2] + hi[2]) / 2,
  ];
  const diag = Math.hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]) || 1;
  return { target, distance: diag * 1.8, yaw: 0.6, pitch: 0.5, fov };
}

/** Plan-view helper for the 2D canvas: world xy to pixel and back. */
export interface PlanView {
  /** Pixels per world unit. */
  zoom: number;
  /** World coordinate at the canvas origin. */
  origin: Vec2;
  height: number;
}

export function worldToPixel(view: PlanView, p: Vec2): Vec2 {
  return [
    (p[0] - view.origin[0]) * view.zoom,
    view.height - (p[1] - view.origin[1]) * view.zoom,
  ];
}

export function pixelToWorld(view: PlanView, p: Vec2): Vec2 {
  return [
    p[0] / view.zoom + view.origin[0],
    (view.height - p[1]) / view.zoom + view.origin[1],
  ];
}
