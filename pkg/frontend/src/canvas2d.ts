/** Thin canvas renderer: draws whatever the annotation state and the
 * service responses contain. No geometry decisions are made here. */

import type { Mode1Annotation, Mode2Annotation } from "./annotation.js";
import type { EmbeddingJson, GraphJson, Vec2 } from "./types.js";
import { meshEdges, projectPoint, worldToPixel } from "./viewer3d.js";
import type { Camera, PlanView } from "./viewer3d.js";

const OUTLINE_COLOR = "#2563eb";
const ROOF_COLOR = "#dc2626";
const CENTER_COLOR = "#059669";
const REGION_COLOR = "#f59e0b";

export function clear(ctx: CanvasRenderingContext2D): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

export function drawImageUnderlay(
  ctx: CanvasRenderingContext2D,
  image: HTMLImageElement | null,
): void {
  if (image !== null) ctx.drawImage(image, 0, 0);
}

function drawDot(ctx: CanvasRenderingContext2D, p: Vec2, color: string, r = 4): void {
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(p[0], p[1], r, 0, 2 * Math.PI);
  ctx.fill();
}

function drawPolyline(
  ctx: CanvasRenderingContext2D,
  pts: readonly Vec2[],
  color: string,
  close: boolean,
): void {
  if (pts.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(pts[0]![0], pts[0]![1]);
  for (const p of pts.slice(1)) ctx.lineTo(p[0], p[1]);
  if (close) ctx.closePath();
  ctx.stroke();
}

export function drawMode2(ctx: CanvasRenderingContext2D, ann: Mode2Annotation): void {
  drawPolyline(ctx, ann.points, OUTLINE_COLOR, ann.closed);
  for (const p of ann.points) drawDot(ctx, p, OUTLINE_COLOR);
  if (!ann.closed) return;
  for (const c of ann.edgeCenters()) drawDot(ctx, c, CENTER_COLOR, 5);
  const selected = new Set(ann.adjacency().map(([i, j]) => `${i},${j}`));
  for (const cand of ann.candidates()) {
    const on = selected.has(`${cand.pair[0]},${cand.pair[1]}`);
    ctx.strokeStyle = on ? ROOF_COLOR : "#d1d5db";
    ctx.setLineDash(on ? [] : [4, 4]);
    ctx.beginPath();
    ctx.moveTo(cand.a[0], cand.a[1]);
    ctx.lineTo(cand.b[0], cand.b[1]);
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

export function drawMode1(ctx: CanvasRenderingContext2D, ann: Mode1Annotation): void {
  drawPolyline(ctx, ann.outlinePoints(), OUTLINE_COLOR, ann.closed);
  for (const p of ann.outlinePoints()) drawDot(ctx, p, OUTLINE_COLOR);
  if (!ann.closed) return;
  for (let id = ann.outlineCount() + 1; id <= ann.vertexCount(); id++) {
    drawDot(ctx, ann.position(id), ROOF_COLOR);
  }
  for (const face of ann.faces) {
    drawPolyline(ctx, face.map((id) => ann.position(id)), ROOF_COLOR, true);
  }
  const pending = ann.pendingIds();
  if (pending.length >= 2) {
    drawPolyline(ctx, pending.map((id) => ann.position(id)), CENTER_COLOR, false);
  }
}

/** Plan-view overlay of a service graph + embedding, with the affected
 * region highlighted. */
export function drawOverlay(
  ctx: CanvasRenderingContext2D,
  view: PlanView,
  graph: GraphJson,
  embedding: EmbeddingJson,
  region: readonly number[] = [],
): void {
  const regionSet = new Set(region);
  for (const face of graph.faces) {
    const pts = face.map((id) => {
      const c = embedding[String(id)] ?? [0, 0];
      return worldToPixel(view, [c[0] ?? 0, c[1] ?? 0]);
    });
    drawPolyline(ctx, pts, "#6b7280", true);
  }
  for (const v of graph.vertices) {
    const c = embedding[String(v.id)] ?? [0, 0];
    const p = worldToPixel(view, [c[0] ?? 0, c[1] ?? 0]);
    const color = regionSet.has(v.id)
      ? REGION_COLOR
      : v.kind === "outline"
        ? OUTLINE_COLOR
        : ROOF_COLOR;
    drawDot(ctx, p, color, regionSet.has(v.id) ? 6 : 4);
  }
}

/** Perspective wireframe of the current 3D embedding. */
export function drawWireframe(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  graph: GraphJson,
  embedding: EmbeddingJson,
): void {
  const viewport = { width: ctx.canvas.width, height: ctx.canvas.height };
  ctx.strokeStyle = "#111827";
  ctx.lineWidth = 1.25;
  for (const [a, b] of meshEdges(graph, embedding)) {
    const pa = projectPoint(cam, a, viewport);
    const pb = projectPoint(cam, b, viewport);
    if (pa === null || pb === null) continue;
    ctx.beginPath();
    ctx.moveTo(pa.x, pa.y);
    ctx.lineTo(pb.x, pb.y);
    ctx.stroke();
  }
}
