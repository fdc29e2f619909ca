/** Golden-fixture rendering tests: the display list is a pure function of
 * the ViewModel, so everything here runs without a live server. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  buildDisplayList,
  cssColor,
  fieldNodeCenter,
  GLYPH_BY_KIND,
  hitTest,
  NodeShape,
  recordHeight,
  RectShape,
  Shape,
  shapeCenter,
  TextShape,
} from "../src/display.js";
import type { ViewModel } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

function fixture(name: string): ViewModel {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8"));
}

function byRole<T extends Shape>(shapes: Shape[], role: string): T[] {
  return shapes.filter((s) => s.role === role) as T[];
}

describe("record glyphs (example fixture)", () => {
  const view = fixture("example_root.json");
  const shapes = buildDisplayList(view);

  it("draws one rectangle per record at its layout position", () => {
    const rects = byRole<RectShape>(shapes, "record");
    expect(rects.map((r) => r.ref).sort()).toEqual(["ai001", "ao001"]);
    const ai = rects.find((r) => r.ref === "ai001")!;
    expect([ai.x, ai.y]).toEqual([2241, 2345]);
  });

  it("shows name, type, a divider, and only non-default fields in the body", () => {
    const texts = shapes.filter((s): s is TextShape => s.kind === "text" && s.role === "decor").map((t) => t.text);
    expect(texts).toContain("ai001");
    expect(texts).toContain("ai");
    expect(texts).toContain("INP=ao001");
    // ao001 has no non-default fields, so no body line mentions it
    expect(texts.filter((t) => t.includes("="))).toEqual(["INP=ao001"]);
    expect(shapes.some((s) => s.kind === "line")).toBe(true);
  });

  it("sizes the body by its non-default field count", () => {
    const [ai, ao] = [view.records[0], view.records[1]];
    expect(recordHeight(ai)).toBeGreaterThan(recordHeight(ao));
  });

  it("draws the link as a polyline through the connector waypoint", () => {
    const lines = shapes.filter((s) => s.kind === "polyline" && s.role === "link");
    expect(lines).toHaveLength(1);
    const pts = (lines[0] as any).points;
    expect(pts.length).toBe(3); // source node, waypoint, target node
    expect(pts[1]).toEqual({ x: 2505, y: 2495 });
    expect(pts[0]).toEqual(fieldNodeCenter(view, "ai001.INP"));
    expect(pts[2]).toEqual(fieldNodeCenter(view, "ao001.VAL"));
  });

  it("draws the connector as a small square with its id", () => {
    const conns = byRole<RectShape>(shapes, "connector");
    expect(conns).toHaveLength(1);
    expect(conns[0].ref).toBe("ai001/INP");
    expect(conns[0].x + conns[0].w / 2).toBe(2505);
    expect(conns[0].y + conns[0].h / 2).toBe(2495);
  });

  it("uses the layout directive's 24-bit color on the field node", () => {
    const nodes = byRole<NodeShape>(shapes, "fieldNode");
    const inp = nodes.find((n) => n.ref === "ai001.INP")!;
    expect(inp.color).toBe(cssColor(16711731));
    expect(cssColor(16711731)).toBe("#ff0033");
  });

  it("has no broken-link or stub markers on a clean intra-group view", () => {
    expect(byRole(shapes, "brokenMarker")).toHaveLength(0);
    expect(byRole(shapes, "linkStub")).toHaveLength(0);
  });
});

describe("field-node glyph shapes", () => {
  it("maps all four kinds onto exactly three shapes", () => {
    expect(GLYPH_BY_KIND).toEqual({
      VARIABLE: "circle",
      INPUT: "in-arrow",
      OUTPUT: "out-arrow",
      FORWARD: "out-arrow",
    });
    expect(new Set(Object.values(GLYPH_BY_KIND)).size).toBe(3);
  });

  it("renders circle / in-arrow / out-arrow from the kinds fixture", () => {
    const shapes = buildDisplayList(fixture("kinds_root.json"));
    const glyphOf = (ref: string) =>
      byRole<NodeShape>(shapes, "fieldNode").find((n) => n.ref === ref)?.glyph;
    expect(glyphOf("ai001.VAL")).toBe("circle");
    expect(glyphOf("calc001.INPA")).toBe("in-arrow");
    expect(glyphOf("ao001.OUT")).toBe("out-arrow");
    expect(glyphOf("ao001.FLNK")).toBe("out-arrow");
  });
});

describe("broken links", () => {
  it("overlays a red X at the dangling end", () => {
    const shapes = buildDisplayList(fixture("broken_link.json"));
    const marks = shapes.filter((s) => s.kind === "cross");
    expect(marks).toHaveLength(1);
    const mark = marks[0] as any;
    expect(mark.role).toBe("brokenMarker");
    expect(mark.color).toBe("#ff0000");
    // the X sits at the end of the link polyline
    const link = shapes.find((s) => s.kind === "polyline" && s.role === "link") as any;
    const end = link.points[link.points.length - 1];
    expect({ x: mark.x, y: mark.y }).toEqual(end);
  });
});

describe("inter-group links", () => {
  it("draws a short stub labeled with the target id", () => {
    const shapes = buildDisplayList(fixture("intergroup_root.json"));
    const stubs = byRole<TextShape>(shapes, "linkStub");
    expect(stubs).toHaveLength(1);
    expect(stubs[0].text).toBe("grp1:ao001.VAL");
    expect(byRole(shapes, "brokenMarker")).toHaveLength(0);
    // the link line stays short: a stub, not a line to the real target
    const link = shapes.find((s) => s.kind === "polyline" && s.role === "link") as any;
    expect(link.points).toHaveLength(2);
    expect(link.points[1].x - link.points[0].x).toBeLessThanOrEqual(40);
  });

  it("draws the group as a rectangle with its name and member count", () => {
    const shapes = buildDisplayList(fixture("intergroup_root.json"));
    const groups = byRole<RectShape>(shapes, "group");
    expect(groups.map((g) => g.ref)).toEqual(["grp1"]);
    const texts = shapes.filter((s): s is TextShape => s.kind === "text" && s.role === "decor").map((t) => t.text);
    expect(texts).toContain("grp1");
    expect(texts).toContain("1 record");
  });
});

describe("hit testing", () => {
  const view = fixture("example_root.json");
  const shapes = buildDisplayList(view);

  it("finds records, field nodes and connectors; records win over links", () => {
    expect(hitTest(shapes, shapeCenter(shapes, "record", "ai001")!))
      .toEqual({ role: "record", ref: "ai001" });
    expect(hitTest(shapes, fieldNodeCenter(view, "ai001.INP")!))
      .toEqual({ role: "fieldNode", ref: "ai001.INP" });
    expect(hitTest(shapes, { x: 2505, y: 2495 }))
      .toEqual({ role: "connector", ref: "ai001/INP" });
  });

  it("returns null on empty canvas (drag there pans, no command)", () => {
    expect(hitTest(shapes, { x: -1000, y: -1000 })).toBeNull();
  });
});
