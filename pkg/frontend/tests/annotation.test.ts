import { describe, expect, it } from "vitest";

import {
  IDENTITY_TRANSFORM,
  Mode1Annotation,
  Mode2Annotation,
  scaleFromBar,
  signedArea2,
} from "../src/annotation.js";

describe("scaleFromBar", () => {
  it("converts a measured bar into world units per pixel", () => {
    expect(scaleFromBar(100, 1).scale).toBe(0.01);
    expect(scaleFromBar(50, 2).scale).toBe(0.04);
  });

  it("rejects non-positive lengths", () => {
    expect(() => scaleFromBar(0, 1)).toThrow("positive");
    expect(() => scaleFromBar(100, -2)).toThrow("positive");
    expect(() => scaleFromBar(NaN, 1)).toThrow("positive");
  });
});

describe("signedArea2", () => {
  it("is positive for counterclockwise and negative for clockwise", () => {
    const ccw: [number, number][] = [[0, 0], [2, 0], [2, 2], [0, 2]];
    expect(signedArea2(ccw)).toBe(8);
    expect(signedArea2([...ccw].reverse())).toBe(-8);
  });
});

describe("Mode2Annotation outline", () => {
  it("normalizes clockwise clicks to counterclockwise on close", () => {
    const m = new Mode2Annotation();
    for (const p of [[0, 0], [0, 2], [2, 2], [2, 0]] as const) {
      m.clickOutline([p[0], p[1]]);
    }
    m.closeOutline();
    expect(m.closed).toBe(true);
    expect(m.points).toEqual([[2, 0], [2, 2], [0, 2], [0, 0]]);
    expect(signedArea2(m.points)).toBeGreaterThan(0);
  });

  it("keeps counterclockwise input untouched", () => {
    const m = new Mode2Annotation();
    for (const p of [[0, 0], [2, 0], [2, 2], [0, 2]] as const) {
      m.clickOutline([p[0], p[1]]);
    }
    m.closeOutline();
    expect(m.points).toEqual([[0, 0], [2, 0], [2, 2], [0, 2]]);
  });

  it("refuses to close with fewer than 3 vertices", () => {
    const m = new Mode2Annotation();
    m.clickOutline([0, 0]);
    m.clickOutline([1, 0]);
    m.closeOutline();
    expect(m.closed).toBe(false);
    expect(m.hint).toBe("need at least 3 outline vertices");
  });

  it("ignores outline clicks once closed, with a hint", () => {
    const m = new Mode2Annotation();
    for (const p of [[0, 0], [2, 0], [1, 2]] as const) m.clickOutline([p[0], p[1]]);
    m.closeOutline();
    m.clickOutline([5, 5]);
    expect(m.points.length).toBe(3);
    expect(m.hint).toBe("outline already closed");
  });
});

describe("Mode2Annotation adjacency", () => {
  function closedSquare(): Mode2Annotation {
    const m = new Mode2Annotation();
    for (const p of [[0, 0], [2, 0], [2, 2], [0, 2]] as const) {
      m.clickOutline([p[0], p[1]]);
    }
    m.closeOutline();
    return m;
  }

  it("has no edge centers or candidates before the outline closes", () => {
    const m = new Mode2Annotation();
    m.clickOutline([0, 0]);
    m.clickOutline([2, 0]);
    m.clickOutline([2, 2]);
    expect(m.edgeCenters()).toEqual([]);
    expect(m.candidates()).toEqual([]);
  });

  it("computes one center per outline edge after closing", () => {
    const m = closedSquare();
    expect(m.edgeCenters()).toEqual([[1, 0], [2, 1], [1, 2], [0, 1]]);
    expect(m.candidates().length).toBe(6);
  });

  it("blocks adjacency clicks before the outline closes", () => {
    const m = new Mode2Annotation();
    m.clickOutline([0, 0]);
    expect(m.clickAdjacency([1, 1])).toBeNull();
    expect(m.hint).toBe("close the outline before marking adjacencies");
  });

  it("toggles the nearest candidate on and off", () => {
    const m = closedSquare();
    expect(m.clickAdjacency([1.5, 0.5])).toEqual([0, 1]);
    expect(m.adjacency()).toEqual([[0, 1]]);
    expect(m.clickAdjacency([1.5, 0.5])).toEqual([0, 1]);
    expect(m.adjacency()).toEqual([]);
  });

  it("returns null when no candidate midpoint is in pick range", () => {
    const m = closedSquare();
    expect(m.clickAdjacency([10, 10], 0.5)).toBeNull();
    expect(m.adjacency()).toEqual([]);
  });

  it("reports selected pairs in sorted order", () => {
    const m = closedSquare();
    m.clickAdjacency([1.5, 1.5]);
    m.clickAdjacency([1.5, 0.5]);
    expect(m.adjacency()).toEqual([[0, 1], [1, 2]]);
  });

  it("builds a dual document in world units", () => {
    const m = new Mode2Annotation();
    for (const p of [[0, 0], [400, 0], [400, 200], [0, 200]] as const) {
      m.clickOutline([p[0], p[1]]);
    }
    m.closeOutline();
    m.clickAdjacency([300, 50]);
    m.clickAdjacency([300, 150]);
    const doc = m.buildDualFile(scaleFromBar(100, 1));
    expect(doc).toEqual({
      format: "roofdual/1",
      outline: [[0, 0], [4, 0], [4, 2], [0, 2]],
      adjacency: [[0, 1], [1, 2]],
    });
  });

  it("refuses to build before closing or without selections", () => {
    const open = new Mode2Annotation();
    open.clickOutline([0, 0]);
    expect(() => open.buildDualFile(IDENTITY_TRANSFORM)).toThrow("not closed");
    const empty = closedSquare();
    expect(() => empty.buildDualFile(IDENTITY_TRANSFORM)).toThrow("no adjacencies");
  });
});

describe("Mode1Annotation", () => {
  function closedSquare(): Mode1Annotation {
    const m = new Mode1Annotation();
    for (const p of [[0, 0], [0, 2], [2, 2], [2, 0]] as const) {
      m.clickOutline([p[0], p[1]]);
    }
    m.closeOutline();
    return m;
  }

  it("normalizes a clockwise outline and numbers vertices from 1", () => {
    const m = closedSquare();
    expect(m.closed).toBe(true);
    expect(m.position(1)).toEqual([2, 0]);
    expect(m.position(4)).toEqual([0, 0]);
    expect(m.vertexCount()).toBe(4);
  });

  it("blocks roof vertices until the outline closes", () => {
    const m = new Mode1Annotation();
    m.clickOutline([0, 0]);
    expect(m.addRoofVertex([1, 1])).toBeNull();
    expect(m.hint).toBe("close the outline before placing roof vertices");
  });

  it("assigns roof ids after the outline ids", () => {
    const m = closedSquare();
    expect(m.outlineCount()).toBe(4);
    expect(m.addRoofVertex([1, 1])).toBe(5);
    expect(m.addRoofVertex([1.5, 1])).toBe(6);
    expect(m.position(6)).toEqual([1.5, 1]);
    expect(() => m.position(7)).toThrow("unknown vertex id 7");
  });

  it("hit-tests placed vertices for face clicks", () => {
    const m = closedSquare();
    m.addRoofVertex([1, 1]);
    expect(m.nearestId([1.1, 0.9], 0.5)).toBe(5);
    expect(m.nearestId([1.9, 0.1], 0.5)).toBe(1);
    expect(m.nearestId([10, 10], 0.5)).toBeNull();
  });

  it("exposes the face-in-progress state for rendering", () => {
    const m = closedSquare();
    m.addRoofVertex([1, 1]);
    expect(m.faceInProgress()).toBe(false);
    m.beginFace();
    m.addFaceVertex(1);
    m.addFaceVertex(5);
    expect(m.faceInProgress()).toBe(true);
    expect(m.pendingIds()).toEqual([1, 5]);
    m.addFaceVertex(2);
    m.commitFace();
    expect(m.faceInProgress()).toBe(false);
    expect(m.pendingIds()).toEqual([]);
    expect(m.outlinePoints().length).toBe(4);
  });

  it("reorients a clockwise face trace counterclockwise", () => {
    const m = closedSquare();
    m.addRoofVertex([1, 1]);
    m.beginFace();
    m.addFaceVertex(1);
    m.addFaceVertex(5);
    m.addFaceVertex(2);
    expect(m.commitFace()).toEqual([2, 5, 1]);
    expect(m.faces).toEqual([[2, 5, 1]]);
  });

  it("keeps a counterclockwise face trace as clicked", () => {
    const m = closedSquare();
    m.addRoofVertex([1, 1]);
    m.beginFace();
    m.addFaceVertex(2);
    m.addFaceVertex(5);
    m.addFaceVertex(1);
    expect(m.commitFace()).toEqual([2, 5, 1]);
  });

  it("guards face building against bad input", () => {
    const m = closedSquare();
    m.addFaceVertex(1);
    expect(m.hint).toBe("no face in progress");
    m.beginFace();
    m.addFaceVertex(1);
    m.addFaceVertex(1);
    expect(m.hint).toBe("vertex already in this face");
    m.addFaceVertex(9);
    expect(m.hint).toBe("no vertex 9");
    m.addFaceVertex(2);
    expect(m.commitFace()).toBeNull();
    expect(m.hint).toBe("a face needs at least 3 vertices");
  });

  it("builds a roof graph document with kinds, scale, and image reference", () => {
    const m = closedSquare();
    m.addRoofVertex([1, 1]);
    m.beginFace();
    m.addFaceVertex(1);
    m.addFaceVertex(2);
    m.addFaceVertex(5);
    m.commitFace();
    const doc = m.buildRoofGraphFile({ scale: 2 }, "plan.png");
    expect(doc.format).toBe("roofgraph/1");
    expect(doc.vertices).toEqual([
      { id: 1, kind: "outline", x: 4, y: 0 },
      { id: 2, kind: "outline", x: 4, y: 4 },
      { id: 3, kind: "outline", x: 0, y: 4 },
      { id: 4, kind: "outline", x: 0, y: 0 },
      { id: 5, kind: "roof", x: 2, y: 2 },
    ]);
    expect(doc.faces).toEqual([[1, 2, 5]]);
    expect(doc.image).toEqual({ path: "plan.png", transform: [2, 0, 0, 2, 0, 0] });
  });

  it("omits the image block when no path is given", () => {
    const m = closedSquare();
    m.addRoofVertex([1, 1]);
    m.beginFace();
    m.addFaceVertex(1);
    m.addFaceVertex(2);
    m.addFaceVertex(5);
    m.commitFace();
    expect(m.buildRoofGraphFile().image).toBeUndefined();
  });

  it("refuses to build without a closed outline or faces", () => {
    const open = new Mode1Annotation();
    open.clickOutline([0, 0]);
    expect(() => open.buildRoofGraphFile()).toThrow("not closed");
    const noFaces = closedSquare();
    expect(() => noFaces.buildRoofGraphFile()).toThrow("no faces");
  });
});
