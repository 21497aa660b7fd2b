/** Typed client for the roof service. All geometry comes from the service;
 * this module only moves JSON. */

import type {
  DualGraphFile,
  EditOpJson,
  EditResponse,
  ErrorPayload,
  OptimizeResponse,
  PutGraphResponse,
  ResolveResponse,
  RoofGraphFile,
  UndoResponse,
} from "./types.js";

export class ServiceApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: ErrorPayload,
  ) {
    super(`${payload.error}: ${payload.message}`);
    this.name = "ServiceApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface SolveOptions {
  mode?: "primal" | "dual" | "variable_height";
  h?: number;
  lambda?: number;
  gamma?: number;
  eta?: number;
  planarity_kind?: "smallest_eig" | "det" | "proj" | "diag";
  max_iters?: number;
}

export class RoofService {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async createSession(): Promise<string> {
    const data = await this.request<{ id: string }>("POST", "/sessions");
    return data.id;
  }

  putGraph(
    sid: string,
    body: RoofGraphFile | DualGraphFile,
    mode?: "primal" | "dual",
  ): Promise<PutGraphResponse> {
    const query = mode ? `?mode=${mode}` : "";
    return this.request("PUT", `/sessions/${sid}/graph${query}`, body);
  }

  optimize(sid: string, options: SolveOptions = {}): Promise<OptimizeResponse> {
    return this.request("POST", `/sessions/${sid}/optimize`, options);
  }

  applyEdit(sid: string, op: EditOpJson): Promise<EditResponse> {
    return this.request("POST", `/sessions/${sid}/edits`, op);
  }

  undo(sid: string): Promise<UndoResponse> {
    return this.request("POST", `/sessions/${sid}/undo`);
  }

  async meshObj(sid: string): Promise<string> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${sid}/mesh.obj`);
    if (!resp.ok) throw new ServiceApiError(resp.status, await resp.json());
    return resp.text();
  }

  resolveAdjacency(body: {
    dual: DualGraphFile;
    strategy?: "greedy" | "sampling";
    threshold?: number;
    max?: number;
  }): Promise<ResolveResponse> {
    return this.request("POST", "/resolve-adjacency", body);
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!resp.ok) throw new ServiceApiError(resp.status, await resp.json());
    return resp.json() as Promise<T>;
  }
}
