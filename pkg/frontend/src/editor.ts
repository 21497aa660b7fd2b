/** Interactive edit-optimize loop.
 *
 * Gestures map to edit operations; at most one mutation is in flight and
 * later gestures queue behind it. Every coordinate in the state comes from
 * the service verbatim: this module never computes geometry.
 */

import { ServiceApiError } from "./api.js";
import type {
  EditOpJson,
  EditResponse,
  EmbeddingJson,
  GraphJson,
  UndoResponse,
  Vec2,
  Vec3,
} from "./types.js";

export type Mutation =
  | { kind: "edit"; op: EditOpJson }
  | { kind: "undo" };

export interface EditorState {
  graph: GraphJson | null;
  embedding: EmbeddingJson | null;
  /** Smallest affected region of the last edit, as returned. */
  region: number[];
  planarity: number | null;
  /** Shown when the service reports a non-converged restricted solve. */
  notice: string | null;
  /** Inline error from the last rejected mutation, pinned to its op. */
  error: { op: Mutation; message: string } | null;
}

export interface EditBackend {
  applyEdit(op: EditOpJson): Promise<EditResponse>;
  undo(): Promise<UndoResponse>;
}

export class EditLoop {
  readonly state: EditorState = {
    graph: null,
    embedding: null,
    region: [],
    planarity: null,
    notice: null,
    error: null,
  };
  private queue: Mutation[] = [];
  private inFlight = false;
  private settled: Promise<void> = Promise.resolve();
  private signalSettled: (() => void) | null = null;

  constructor(private readonly backend: EditBackend) {}

  /** Queue one mutation; returns immediately. */
  enqueue(mutation: Mutation): void {
    this.queue.push(mutation);
    if (!this.inFlight) void this.pump();
  }

  edit(op: EditOpJson): void {
    this.enqueue({ kind: "edit", op });
  }

  undo(): void {
    this.enqueue({ kind: "undo" });
  }

  /** Resolves once the queue has drained. */
  idle(): Promise<void> {
    return this.settled;
  }

  pendingCount(): number {
    return this.queue.length + (this.inFlight ? 1 : 0);
  }

  private async pump(): Promise<void> {
    this.inFlight = true;
    this.settled = new Promise((resolve) => {
      this.signalSettled = resolve;
    });
    try {
      while (this.queue.length > 0) {
        const mutation = this.queue.shift()!;
        try {
          if (mutation.kind === "edit") {
            const resp = await this.backend.applyEdit(mutation.op);
            this.state.graph = resp.graph;
            this.state.embedding = resp.embedding;
            this.state.region = resp.region;
            this.state.planarity = resp.planarity;
            this.state.notice = resp.converged
              ? null
              : "region expanded / full re-solve";
            this.state.error = null;
          } else {
            const resp = await this.backend.undo();
            this.state.graph = resp.graph;
            this.state.embedding = resp.embedding;
            this.state.region = [];
            this.state.notice = null;
            this.state.error = null;
          }
        } catch (exc) {
          const message =
            exc instanceof ServiceApiError ? exc.payload.message : String(exc);
          this.state.error = { op: mutation, message };
        }
      }
    } finally {
      this.inFlight = false;
      this.signalSettled?.();
      this.signalSettled = null;
    }
  }
}

/** Builds one move_vertex operation from a drag gesture; intermediate moves
 * only accumulate, so one gesture costs one mutation. */
export class DragGesture {
  private start: Vec2;
  private current: Vec2;

  constructor(
    readonly vertexId: number,
    startWorld: Vec2,
  ) {
    this.start = startWorld;
    this.current = startWorld;
  }

  moveTo(world: Vec2): void {
    this.current = world;
  }

  delta(): Vec3 {
    return [this.current[0] - this.start[0], this.current[1] - this.start[1], 0];
  }

  /** The finished gesture as an edit op, or null for a no-op drag. */
  finish(): EditOpJson | null {
    const [dx, dy] = this.delta();
    if (dx === 0 && dy === 0) return null;
    return { kind: "move_vertex", vertex: this.vertexId, delta: [dx, dy, 0] };
  }
}

/** Nearest vertex of an embedding to a world-space point, within a radius. */
export function nearestVertex(
  embedding: EmbeddingJson,
  p: Vec2,
  radius: number,
): number | null {
  let best: number | null = null;
  let bestDist = radius;
  for (const [id, coords] of Object.entries(embedding)) {
    const d = Math.hypot((coords[0] ?? 0) - p[0], (coords[1] ?? 0) - p[1]);
    if (d <= bestDist) {
      best = Number(id);
      bestDist = d;
    }
  }
  return best;
}

/** Face index whose vertex centroid is nearest to a world-space point,
 * within a radius. Picking only; coordinates are service-provided. */
export function nearestFace(
  graph: GraphJson,
  embedding: EmbeddingJson,
  p: Vec2,
  radius: number,
): number | null {
  let best: number | null = null;
  let bestDist = radius;
  graph.faces.forEach((face, idx) => {
    if (face.length === 0) return;
    let cx = 0;
    let cy = 0;
    for (const id of face) {
      const c = embedding[String(id)] ?? [];
      cx += c[0] ?? 0;
      cy += c[1] ?? 0;
    }
    const d = Math.hypot(cx / face.length - p[0], cy / face.length - p[1]);
    if (d <= bestDist) {
      best = idx;
      bestDist = d;
    }
  });
  return best;
}

export type ToolName = "snap_edge" | "merge_faces" | "split_face" | "force_adjacent";

/** Picks a tool consumes before its operation is complete. */
export function picksNeeded(tool: ToolName): number {
  return tool === "force_adjacent" ? 4 : 2;
}

/** What the next click should pick for a tool, given how many picks exist:
 * snap/split take vertices, merge takes faces, force takes two faces then
 * two vertices. */
export function pickKind(tool: ToolName, picked: number): "vertex" | "face" {
  if (tool === "snap_edge" || tool === "split_face") return "vertex";
  if (tool === "merge_faces") return "face";
  return picked < 2 ? "face" : "vertex";
}

/** Operation for a completed pick sequence, or null while picks are missing
 * or when a split pair lies in no common face. */
export function opFromPicks(
  tool: ToolName,
  picks: readonly number[],
  faces: readonly (readonly number[])[],
): EditOpJson | null {
  if (picks.length < picksNeeded(tool)) return null;
  const a = picks[0]!;
  const b = picks[1]!;
  switch (tool) {
    case "snap_edge":
      return { kind: "snap_edge", edge: [a, b] };
    case "merge_faces":
      return { kind: "merge_faces", faces: [a, b] };
    case "split_face": {
      const face = faces.findIndex((f) => f.includes(a) && f.includes(b));
      if (face < 0) return null;
      return { kind: "split_face", face, pair: [a, b] };
    }
    case "force_adjacent":
      return { kind: "force_adjacent", faces: [a, b], pair: [picks[2]!, picks[3]!] };
  }
}
