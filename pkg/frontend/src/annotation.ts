/** Annotation state machines for the two labeling modes.
 *
 * Mode 1 labels the roof structure directly: outline clicks, then roof
 * vertices, then face polygons over the placed vertices. Mode 2 labels the
 * outline and then paints face adjacencies between automatically computed
 * outline-edge centers. Both work in image space; the produced files are in
 * world units via the scale-bar transform.
 */

import type { DualGraphFile, RoofGraphFile, Vec2, VertexJson } from "./types.js";

/** World units per image pixel; default 1 px = 1 unit. */
export interface PixelTransform {
  scale: number;
}

export function scaleFromBar(pixelLength: number, worldLength: number): PixelTransform {
  if (!(pixelLength > 0) || !(worldLength > 0)) {
    throw new Error("scale bar lengths must be positive");
  }
  return { scale: worldLength / pixelLength };
}

export const IDENTITY_TRANSFORM: PixelTransform = { scale: 1 };

function toWorld(p: Vec2, t: PixelTransform): Vec2 {
  return [p[0] * t.scale, p[1] * t.scale];
}

/** Twice the signed polygon area; > 0 means counterclockwise. */
export function signedArea2(points: readonly Vec2[]): number {
  let s = 0;
  for (let i = 0; i < points.length; i++) {
    const a = points[i]!;
    const b = points[(i + 1) % points.length]!;
    s += a[0] * b[1] - b[0] * a[1];
  }
  return s;
}

function dist(a: Vec2, b: Vec2): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1]);
}

export interface AdjacencyCandidate {
  /** Outline edge index pair, i < j. */
  pair: readonly [number, number];
  a: Vec2;
  b: Vec2;
  mid: Vec2;
}

/** Outline + face-adjacency labeling. */
export class Mode2Annotation {
  readonly mode = "dual" as const;
  points: Vec2[] = [];
  closed = false;
  /** Selected adjacencies as canonical "i,j" keys. */
  readonly selected = new Set<string>();
  /** Inline hint shown when a gesture is blocked. */
  hint: string | null = null;

  clickOutline(p: Vec2): void {
    if (this.closed) {
      this.hint = "outline already closed";
      return;
    }
    this.hint = null;
    this.points.push(p);
  }

  /** Close the outline and normalize it to counterclockwise order; the edge
   * centers for the adjacency phase exist only after this. */
  closeOutline(): void {
    if (this.closed) return;
    if (this.points.length < 3) {
      this.hint = "need at least 3 outline vertices";
      return;
    }
    if (signedArea2(this.points) < 0) this.points.reverse();
    this.closed = true;
    this.hint = null;
  }

  /** Midpoints of the outline edges, edge i from vertex i to i+1. */
  edgeCenters(): Vec2[] {
    if (!this.closed) return [];
    const n = this.points.length;
    const out: Vec2[] = [];
    for (let i = 0; i < n; i++) {
      const a = this.points[i]!;
      const b = this.points[(i + 1) % n]!;
      out.push([(a[0] + b[0]) / 2, (a[1] + b[1]) / 2]);
    }
    return out;
  }

  /** Every unordered pair of edge centers is a clickable adjacency. */
  candidates(): AdjacencyCandidate[] {
    const centers = this.edgeCenters();
    const out: AdjacencyCandidate[] = [];
    for (let i = 0; i < centers.length; i++) {
      for (let j = i + 1; j < centers.length; j++) {
        const a = centers[i]!;
        const b = centers[j]!;
        out.push({ pair: [i, j], a, b, mid: [(a[0] + b[0]) / 2, (a[1] + b[1]) / 2] });
      }
    }
    return out;
  }

  /** Toggle the adjacency whose candidate segment midpoint is nearest to the
   * click. Returns the pair, or null when blocked or nothing in range. */
  clickAdjacency(p: Vec2, pickRadius = 16): readonly [number, number] | null {
    if (!this.closed) {
      this.hint = "close the outline before marking adjacencies";
      return null;
    }
    let best: AdjacencyCandidate | null = null;
    let bestDist = pickRadius;
    for (const cand of this.candidates()) {
      const d = dist(cand.mid, p);
      if (d <= bestDist) {
        best = cand;
        bestDist = d;
      }
    }
    if (best === null) return null;
    const key = `${best.pair[0]},${best.pair[1]}`;
    if (this.selected.has(key)) this.selected.delete(key);
    else this.selected.add(key);
    this.hint = null;
    return best.pair;
  }

  adjacency(): [number, number][] {
    return [...this.selected]
      .map((k) => k.split(",").map(Number) as [number, number])
      .sort((x, y) => x[0] - y[0] || x[1] - y[1]);
  }

  buildDualFile(transform: PixelTransform = IDENTITY_TRANSFORM): DualGraphFile {
    if (!this.closed) throw new Error("outline is not closed");
    if (this.selected.size === 0) throw new Error("no adjacencies selected");
    return {
      format: "roofdual/1",
      outline: this.points.map((p) => [...toWorld(p, transform)]),
      adjacency: this.adjacency().map((p) => [...p]),
    };
  }
}

/** Direct roof-structure labeling: outline cycle, roof vertices, faces. */
export class Mode1Annotation {
  readonly mode = "primal" as const;
  private outline: Vec2[] = [];
  private roof: Vec2[] = [];
  closed = false;
  faces: number[][] = [];
  private pendingFace: number[] | null = null;
  hint: string | null = null;

  clickOutline(p: Vec2): void {
    if (this.closed) {
      this.hint = "outline already closed";
      return;
    }
    this.hint = null;
    this.outline.push(p);
  }

  closeOutline(): void {
    if (this.closed) return;
    if (this.outline.length < 3) {
      this.hint = "need at least 3 outline vertices";
      return;
    }
    if (signedArea2(this.outline) < 0) this.outline.reverse();
    this.closed = true;
    this.hint = null;
  }

  /** Outline ids are 1..n in cycle order, roof ids follow. */
  addRoofVertex(p: Vec2): number | null {
    if (!this.closed) {
      this.hint = "close the outline before placing roof vertices";
      return null;
    }
    this.roof.push(p);
    this.hint = null;
    return this.outline.length + this.roof.length;
  }

  position(id: number): Vec2 {
    const n = this.outline.length;
    const p = id <= n ? this.outline[id - 1] : this.roof[id - n - 1];
    if (p === undefined) throw new Error(`unknown vertex id ${id}`);
    return p;
  }

  outlinePoints(): readonly Vec2[] {
    return this.outline;
  }

  outlineCount(): number {
    return this.outline.length;
  }

  vertexCount(): number {
    return this.outline.length + this.roof.length;
  }

  /** Placed vertex id nearest to a click, within a pick radius. */
  nearestId(p: Vec2, radius = 16): number | null {
    let best: number | null = null;
    let bestDist = radius;
    for (let id = 1; id <= this.vertexCount(); id++) {
      const d = dist(this.position(id), p);
      if (d <= bestDist) {
        best = id;
        bestDist = d;
      }
    }
    return best;
  }

  faceInProgress(): boolean {
    return this.pendingFace !== null;
  }

  pendingIds(): readonly number[] {
    return this.pendingFace ?? [];
  }

  beginFace(): void {
    if (!this.closed) {
      this.hint = "close the outline before defining faces";
      return;
    }
    this.pendingFace = [];
    this.hint = null;
  }

  addFaceVertex(id: number): void {
    if (this.pendingFace === null) {
      this.hint = "no face in progress";
      return;
    }
    if (id < 1 || id > this.vertexCount()) {
      this.hint = `no vertex ${id}`;
      return;
    }
    if (this.pendingFace.includes(id)) {
      this.hint = "vertex already in this face";
      return;
    }
    this.pendingFace.push(id);
    this.hint = null;
  }

  /** Commit the pending face, reorienting clockwise input counterclockwise. */
  commitFace(): number[] | null {
    if (this.pendingFace === null) {
      this.hint = "no face in progress";
      return null;
    }
    if (this.pendingFace.length < 3) {
      this.hint = "a face needs at least 3 vertices";
      return null;
    }
    const cycle = [...this.pendingFace];
    if (signedArea2(cycle.map((id) => this.position(id))) < 0) cycle.reverse();
    this.faces.push(cycle);
    this.pendingFace = null;
    this.hint = null;
    return cycle;
  }

  buildRoofGraphFile(
    transform: PixelTransform = IDENTITY_TRANSFORM,
    imagePath?: string,
  ): RoofGraphFile {
    if (!this.closed) throw new Error("outline is not closed");
    if (this.faces.length === 0) throw new Error("no faces defined");
    const vertices: VertexJson[] = [];
    for (let i = 0; i < this.vertexCount(); i++) {
      const id = i + 1;
      const [x, y] = toWorld(this.position(id), transform);
      vertices.push({
        id,
        kind: id <= this.outline.length ? "outline" : "roof",
        x,
        y,
      });
    }
    const file: RoofGraphFile = {
      format: "roofgraph/1",
      vertices,
      faces: this.faces.map((f) => [...f]),
    };
    if (imagePath !== undefined) {
      const s = transform.scale;
      file.image = { path: imagePath, transform: [s, 0, 0, s, 0, 0] };
    }
    return file;
  }
}
