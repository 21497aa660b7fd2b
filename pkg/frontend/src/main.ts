/** Page wiring: DOM events to the annotation/editor state machines and the
 * service client. All geometry shown comes back from the service. */

import { Mode1Annotation, Mode2Annotation, scaleFromBar } from "./annotation.js";
import type { PixelTransform } from "./annotation.js";
import { RoofService, ServiceApiError } from "./api.js";
import {
  clear,
  drawImageUnderlay,
  drawMode1,
  drawMode2,
  drawOverlay,
  drawWireframe,
} from "./canvas2d.js";
import {
  DragGesture,
  EditLoop,
  nearestFace,
  nearestVertex,
  opFromPicks,
  pickKind,
  picksNeeded,
} from "./editor.js";
import type { ToolName } from "./editor.js";
import { fitCamera, orbit, pixelToWorld, zoom } from "./viewer3d.js";
import type { Camera, PlanView } from "./viewer3d.js";
import type { EmbeddingJson, GraphJson, Vec2 } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const annotateCanvas = el<HTMLCanvasElement>("annotate");
const viewCanvas = el<HTMLCanvasElement>("view3d");
const statusLine = el<HTMLDivElement>("status");
const errBadge = el<HTMLSpanElement>("err-badge");

const service = new RoofService("");
let sessionId: string | null = null;
let mode1 = new Mode1Annotation();
let mode2 = new Mode2Annotation();
let activeMode: "1" | "2" = "2";
let transform: PixelTransform = { scale: 1 };
let graph: GraphJson | null = null;
let embedding: EmbeddingJson | null = null;
let region: number[] = [];
let camera: Camera | null = null;
let drag: DragGesture | null = null;
let tool: "move" | ToolName = "move";
let picks: number[] = [];
let underlay: HTMLImageElement | null = null;
let underlayName: string | null = null;

const planView: PlanView = { zoom: 60, origin: [-1, -1], height: 0 };

const loop = new EditLoop({
  applyEdit: (op) => {
    if (sessionId === null) throw new Error("no session");
    return service.applyEdit(sessionId, op);
  },
  undo: () => {
    if (sessionId === null) throw new Error("no session");
    return service.undo(sessionId);
  },
});

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function redraw(): void {
  const actx = annotateCanvas.getContext("2d")!;
  planView.height = annotateCanvas.height;
  clear(actx);
  drawImageUnderlay(actx, underlay);
  if (graph !== null && embedding !== null) {
    drawOverlay(actx, planView, graph, embedding, region);
  } else if (activeMode === "2") {
    drawMode2(actx, mode2);
  } else {
    drawMode1(actx, mode1);
  }
  const hint = activeMode === "2" ? mode2.hint : mode1.hint;
  if (hint !== null) setStatus(hint);

  const vctx = viewCanvas.getContext("2d")!;
  clear(vctx);
  if (graph !== null && embedding !== null && camera !== null) {
    drawWireframe(vctx, camera, graph, embedding);
  }
}

function pullEditorState(): void {
  if (loop.state.graph !== null) graph = loop.state.graph;
  if (loop.state.embedding !== null) embedding = loop.state.embedding;
  region = loop.state.region;
  if (loop.state.planarity !== null) {
    errBadge.textContent = `err ${loop.state.planarity}`;
  }
  if (loop.state.notice !== null) setStatus(loop.state.notice);
  if (loop.state.error !== null) setStatus(loop.state.error.message);
  redraw();
}

async function ensureSession(): Promise<string> {
  if (sessionId === null) sessionId = await service.createSession();
  return sessionId;
}

async function submitAnnotation(): Promise<void> {
  try {
    const sid = await ensureSession();
    const body =
      activeMode === "2"
        ? mode2.buildDualFile(transform)
        : mode1.buildRoofGraphFile(transform, underlayName ?? undefined);
    const put = await service.putGraph(sid, body);
    graph = put.graph;
    embedding = put.embedding;
    region = [];
    setStatus(`loaded (${put.mode}); optimizing`);
    redraw();
    const res = await service.optimize(sid);
    embedding = res.embedding;
    camera = fitCamera(res.embedding);
    errBadge.textContent = `err ${res.planarity}`;
    setStatus(res.converged ? "optimized" : "did not converge");
    redraw();
  } catch (exc) {
    setStatus(exc instanceof ServiceApiError ? exc.payload.message : String(exc));
  }
}

function annotateClick(p: Vec2): void {
  if (activeMode === "2") {
    if (mode2.closed) mode2.clickAdjacency(p);
    else mode2.clickOutline(p);
    return;
  }
  if (!mode1.closed) {
    mode1.clickOutline(p);
  } else if (mode1.faceInProgress()) {
    const id = mode1.nearestId(p);
    if (id === null) setStatus("no vertex near click");
    else mode1.addFaceVertex(id);
  } else {
    mode1.addRoofVertex(p);
  }
}

function toolClick(world: Vec2): void {
  if (graph === null || embedding === null || tool === "move") return;
  const want = pickKind(tool, picks.length);
  const id =
    want === "vertex"
      ? nearestVertex(embedding, world, 12 / planView.zoom)
      : nearestFace(graph, embedding, world, 24 / planView.zoom);
  if (id === null) {
    setStatus(`no ${want} near click`);
    return;
  }
  picks.push(id);
  const op = opFromPicks(tool, picks, graph.faces);
  if (op !== null) {
    picks = [];
    loop.edit(op);
    void loop.idle().then(pullEditorState);
  } else if (picks.length >= picksNeeded(tool)) {
    picks = [];
    setStatus("picked vertices share no face");
  } else {
    setStatus(`${tool}: ${picks.length}/${picksNeeded(tool)} picked`);
  }
}

annotateCanvas.addEventListener("pointerdown", (ev) => {
  const rect = annotateCanvas.getBoundingClientRect();
  const p: [number, number] = [ev.clientX - rect.left, ev.clientY - rect.top];
  if (graph !== null && embedding !== null) {
    const world = pixelToWorld(planView, p);
    if (tool !== "move") {
      toolClick(world);
      return;
    }
    const vid = nearestVertex(embedding, world, 12 / planView.zoom);
    if (vid !== null) drag = new DragGesture(vid, world);
    return;
  }
  annotateClick(p);
  redraw();
});

annotateCanvas.addEventListener("pointermove", (ev) => {
  if (drag === null) return;
  const rect = annotateCanvas.getBoundingClientRect();
  drag.moveTo(pixelToWorld(planView, [ev.clientX - rect.left, ev.clientY - rect.top]));
});

annotateCanvas.addEventListener("pointerup", () => {
  if (drag === null) return;
  const op = drag.finish();
  drag = null;
  if (op !== null) {
    loop.edit(op);
    void loop.idle().then(pullEditorState);
  }
});

viewCanvas.addEventListener("pointermove", (ev) => {
  if (camera === null || ev.buttons !== 1) return;
  camera = orbit(camera, ev.movementX * 0.01, ev.movementY * 0.01);
  redraw();
});

viewCanvas.addEventListener("wheel", (ev) => {
  if (camera === null) return;
  camera = zoom(camera, ev.deltaY > 0 ? 1.1 : 0.9);
  redraw();
  ev.preventDefault();
});

el<HTMLButtonElement>("close-outline").addEventListener("click", () => {
  (activeMode === "2" ? mode2 : mode1).closeOutline();
  redraw();
});

el<HTMLButtonElement>("begin-face").addEventListener("click", () => {
  mode1.beginFace();
  redraw();
});

el<HTMLButtonElement>("commit-face").addEventListener("click", () => {
  mode1.commitFace();
  redraw();
});

el<HTMLButtonElement>("submit").addEventListener("click", () => {
  void submitAnnotation();
});

el<HTMLButtonElement>("undo").addEventListener("click", () => {
  loop.undo();
  void loop.idle().then(pullEditorState);
});

el<HTMLButtonElement>("reset").addEventListener("click", () => {
  mode1 = new Mode1Annotation();
  mode2 = new Mode2Annotation();
  graph = null;
  embedding = null;
  region = [];
  picks = [];
  setStatus("annotation reset");
  redraw();
});

el<HTMLSelectElement>("mode").addEventListener("change", (ev) => {
  activeMode = (ev.target as HTMLSelectElement).value === "1" ? "1" : "2";
  redraw();
});

el<HTMLSelectElement>("tool").addEventListener("change", (ev) => {
  const value = (ev.target as HTMLSelectElement).value;
  tool = value as "move" | ToolName;
  picks = [];
  setStatus(`tool: ${tool}`);
});

el<HTMLInputElement>("image-file").addEventListener("change", (ev) => {
  const file = (ev.target as HTMLInputElement).files?.[0];
  if (file === undefined) return;
  const img = new Image();
  img.onload = () => redraw();
  img.src = URL.createObjectURL(file);
  underlay = img;
  underlayName = file.name;
});

el<HTMLButtonElement>("scale-bar").addEventListener("click", () => {
  const px = Number(el<HTMLInputElement>("scale-px").value);
  const world = Number(el<HTMLInputElement>("scale-world").value);
  try {
    transform = scaleFromBar(px, world);
    setStatus(`scale set: 1 px = ${transform.scale} units`);
  } catch (exc) {
    setStatus(String(exc));
  }
});

el<HTMLButtonElement>("download-obj").addEventListener("click", () => {
  void (async () => {
    try {
      const sid = await ensureSession();
      const obj = await service.meshObj(sid);
      const blob = new Blob([obj], { type: "text/plain" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = "roof.obj";
      a.click();
      URL.revokeObjectURL(a.href);
    } catch (exc) {
      setStatus(exc instanceof ServiceApiError ? exc.payload.message : String(exc));
    }
  })();
});

setStatus("click outline vertices, close, mark adjacencies, submit");
redraw();
