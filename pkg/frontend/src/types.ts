/** Shared types mirroring the HTTP service payloads and file formats. */

export type Vec2 = readonly [number, number];
export type Vec3 = readonly [number, number, number];

export interface VertexJson {
  id: number;
  kind: "outline" | "roof";
  x: number;
  y: number;
  z?: number;
  height_group?: string | number;
}

export interface ImageRef {
  path: string;
  /** Row-major 2x3 affine image-to-world transform [a, b, c, d, e, f]. */
  transform: number[];
}

export interface RoofGraphFile {
  format: "roofgraph/1";
  vertices: VertexJson[];
  faces: number[][];
  image?: ImageRef;
}

export interface DualGraphFile {
  format: "roofdual/1";
  outline: number[][];
  adjacency?: number[][];
  probabilities?: number[][];
  merge_map?: Record<string, number>;
}

/** Vertex id (as string) to [x, y] or [x, y, z]. */
export type EmbeddingJson = Record<string, number[]>;

export interface GraphJson {
  format: string;
  vertices: VertexJson[];
  faces: number[][];
  image?: ImageRef;
}

export interface PutGraphResponse {
  mode: "primal" | "dual";
  graph: GraphJson;
  embedding: EmbeddingJson;
}

export interface OptimizeResponse {
  converged: boolean;
  iterations: number;
  planarity: number;
  wall_time: number;
  energy_trace: number[][];
  embedding: EmbeddingJson;
}

export interface EditOpJson {
  kind: "move_vertex" | "move_edge" | "snap_edge" | "merge_faces"
      | "split_face" | "force_adjacent";
  vertex?: number;
  edge?: [number, number];
  face?: number;
  faces?: [number, number];
  pair?: [number, number];
  delta?: [number, number, number];
}

export interface EditResponse {
  converged: boolean;
  planarity: number;
  region: number[];
  graph: GraphJson;
  embedding: EmbeddingJson;
}

export interface UndoResponse {
  graph: GraphJson;
  embedding: EmbeddingJson;
}

export interface AdjacencyCandidateJson {
  pairs: number[][];
  score: number;
  provenance: unknown[][];
}

export interface ResolveResponse {
  truncated: boolean;
  candidates: AdjacencyCandidateJson[];
}

export interface ErrorPayload {
  error: string;
  message: string;
  [key: string]: unknown;
}
