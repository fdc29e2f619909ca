/** Pure ViewModel -> display-list construction, in world coordinates.
 *
 * Every frame is derivable from the last fetched ViewModel; no link
 * resolution, grouping or default handling happens on the client. Keeping
 * this module free of DOM types lets tests render golden ViewModel fixtures
 * without a browser or a live server.
 */

import type { FieldKind, ViewModel, ViewRecord } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export type Role =
  | "record"
  | "group"
  | "fieldNode"
  | "connector"
  | "link"
  | "linkStub"
  | "brokenMarker"
  | "decor";

export type NodeGlyph = "circle" | "in-arrow" | "out-arrow";

interface ShapeBase {
  role: Role;
  /** Identity for hit-testing: record name, group name, "rec.FLD", connector id. */
  ref?: string;
}

export interface RectShape extends ShapeBase {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  fill?: string;
  stroke?: string;
}

export interface TextShape extends ShapeBase {
  kind: "text";
  x: number;
  y: number;
  text: string;
  size: number;
  color?: string;
  bold?: boolean;
}

export interface LineShape extends ShapeBase {
  kind: "line";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color?: string;
}

export interface PolylineShape extends ShapeBase {
  kind: "polyline";
  points: Point[];
  color?: string;
  dashed?: boolean;
}

/** A field node: small square with a kind glyph drawn inside. */
export interface NodeShape extends ShapeBase {
  kind: "node";
  x: number;
  y: number;
  size: number;
  glyph: NodeGlyph;
  color: string;
}

/** Red X marker at the dangling end of a broken link. */
export interface CrossShape extends ShapeBase {
  kind: "cross";
  x: number;
  y: number;
  size: number;
  color: string;
}

export type Shape =
  | RectShape
  | TextShape
  | LineShape
  | PolylineShape
  | NodeShape
  | CrossShape;

export const RECORD_WIDTH = 120;
export const HEADER_HEIGHT = 30;
export const FIELD_LINE_HEIGHT = 14;
export const NODE_SIZE = 12;
export const NODE_GAP = 4;
export const STUB_LENGTH = 40;
export const CONNECTOR_SIZE = 8;
export const GROUP_PADDING = 40;

export const GLYPH_BY_KIND: Record<FieldKind, NodeGlyph> = {
  VARIABLE: "circle",
  INPUT: "in-arrow",
  OUTPUT: "out-arrow",
  FORWARD: "out-arrow",
};

export function cssColor(rgb: number): string {
  return "#" + (rgb & 0xffffff).toString(16).padStart(6, "0");
}

export function recordHeight(rec: ViewRecord): number {
  return HEADER_HEIGHT + rec.nonDefaultFields.length * FIELD_LINE_HEIGHT + 6;
}

/** World-coordinate center of a record's i-th field node square. */
function nodeCenter(rec: ViewRecord, index: number): Point {
  return {
    x: rec.x + index * (NODE_SIZE + NODE_GAP) + NODE_SIZE / 2,
    y: rec.y + recordHeight(rec) + NODE_GAP + NODE_SIZE / 2,
  };
}

/** Center of the node square for "rec.FLD", or null if not displayed. */
export function fieldNodeCenter(view: ViewModel, id: string): Point | null {
  const dot = id.indexOf(".");
  const recName = id.slice(0, dot);
  const fld = id.slice(dot + 1);
  const rec = view.records.find((r) => r.name === recName);
  if (!rec) return null;
  const index = rec.fieldNodes.findIndex((n) => n.field === fld);
  if (index < 0) return null;
  return nodeCenter(rec, index);
}

function recordShapes(rec: ViewRecord): Shape[] {
  const h = recordHeight(rec);
  const shapes: Shape[] = [
    { kind: "rect", role: "record", ref: rec.name, x: rec.x, y: rec.y, w: RECORD_WIDTH, h, fill: "#ffffff", stroke: "#000000" },
    { kind: "text", role: "decor", x: rec.x + 4, y: rec.y + 12, text: rec.name, size: 11, bold: true },
    { kind: "text", role: "decor", x: rec.x + 4, y: rec.y + 25, text: rec.type, size: 10, color: "#555555" },
    { kind: "line", role: "decor", x1: rec.x, y1: rec.y + HEADER_HEIGHT, x2: rec.x + RECORD_WIDTH, y2: rec.y + HEADER_HEIGHT },
  ];
  rec.nonDefaultFields.forEach((f, i) => {
    shapes.push({
      kind: "text",
      role: "decor",
      x: rec.x + 4,
      y: rec.y + HEADER_HEIGHT + (i + 1) * FIELD_LINE_HEIGHT - 3,
      text: `${f.name}=${f.value}`,
      size: 10,
    });
  });
  rec.fieldNodes.forEach((node, i) => {
    const c = nodeCenter(rec, i);
    shapes.push({
      kind: "node",
      role: "fieldNode",
      ref: `${rec.name}.${node.field}`,
      x: c.x - NODE_SIZE / 2,
      y: c.y - NODE_SIZE / 2,
      size: NODE_SIZE,
      glyph: GLYPH_BY_KIND[node.kind],
      color: cssColor(node.color),
    });
  });
  return shapes;
}

function linkShapes(view: ViewModel, link: ViewModel["links"][number]): Shape[] {
  const shapes: Shape[] = [];
  const srcRec = view.records.find((r) => r.name === link.source.split(".", 1)[0]);
  if (!srcRec) return shapes;
  const start =
    fieldNodeCenter(view, link.source) ?? {
      x: srcRec.x + RECORD_WIDTH / 2,
      y: srcRec.y + recordHeight(srcRec),
    };

  const targetRecName = link.targetLabel.slice(0, link.targetLabel.lastIndexOf("."));
  const targetInView = view.records.some((r) => r.name === targetRecName);
  const waypoints: Point[] = link.waypoints.map((w) => ({ x: w.x, y: w.y }));

  let end: Point;
  let stub = false;
  if (targetInView && !link.broken) {
    end =
      fieldNodeCenter(view, link.targetLabel) ?? {
        x: view.records.find((r) => r.name === targetRecName)!.x + RECORD_WIDTH / 2,
        y: view.records.find((r) => r.name === targetRecName)!.y,
      };
  } else {
    // Target outside this view (inter-group) or nonexistent (broken):
    // the line dangles as a labeled stub past the last known point.
    stub = true;
    const last = waypoints.length > 0 ? waypoints[waypoints.length - 1] : start;
    end = { x: last.x + STUB_LENGTH, y: last.y };
  }

  shapes.push({
    kind: "polyline",
    role: "link",
    ref: link.source,
    points: [start, ...waypoints, end],
    color: "#333333",
    dashed: true,
  });
  for (const w of link.waypoints) {
    shapes.push({
      kind: "rect",
      role: "connector",
      ref: w.id,
      x: w.x - CONNECTOR_SIZE / 2,
      y: w.y - CONNECTOR_SIZE / 2,
      w: CONNECTOR_SIZE,
      h: CONNECTOR_SIZE,
      fill: "#000000",
    });
  }
  if (stub && (link.interGroup || targetInView)) {
    shapes.push({
      kind: "text",
      role: "linkStub",
      ref: link.source,
      x: end.x + 4,
      y: end.y + 4,
      text: link.targetLabel,
      size: 10,
      color: "#333333",
    });
  }
  if (link.broken) {
    shapes.push({
      kind: "cross",
      role: "brokenMarker",
      ref: link.source,
      x: end.x,
      y: end.y,
      size: 10,
      color: "#ff0000",
    });
  }
  return shapes;
}

function groupShapes(view: ViewModel, group: ViewModel["subgroups"][number]): Shape[] {
  const box = group.boundingBox ?? { x: 100, y: 100, w: 0, h: 0 };
  const x = box.x - GROUP_PADDING;
  const y = box.y - GROUP_PADDING;
  const w = box.w + RECORD_WIDTH + 2 * GROUP_PADDING;
  const h = box.h + HEADER_HEIGHT + 2 * GROUP_PADDING;
  return [
    { kind: "rect", role: "group", ref: group.name, x, y, w, h, fill: "#f0f4ff", stroke: "#3355aa" },
    { kind: "text", role: "decor", x: x + 6, y: y + 16, text: group.name, size: 12, bold: true },
    { kind: "text", role: "decor", x: x + 6, y: y + 30, text: `${group.memberCount} record${group.memberCount === 1 ? "" : "s"}`, size: 10, color: "#555555" },
  ];
}

/** Build the full display list for one ViewModel frame. */
export function buildDisplayList(view: ViewModel): Shape[] {
  const shapes: Shape[] = [];
  for (const group of view.subgroups) shapes.push(...groupShapes(view, group));
  for (const link of view.links) shapes.push(...linkShapes(view, link));
  for (const rec of view.records) shapes.push(...recordShapes(rec));
  return shapes;
}

export interface Hit {
  role: Role;
  ref: string;
}

/** Topmost interactive shape under a world-coordinate point. */
export function hitTest(shapes: Shape[], p: Point): Hit | null {
  for (let i = shapes.length - 1; i >= 0; i--) {
    const s = shapes[i];
    if (s.ref === undefined) continue;
    if (s.kind === "rect" && (s.role === "record" || s.role === "group" || s.role === "connector")) {
      if (p.x >= s.x && p.x <= s.x + s.w && p.y >= s.y && p.y <= s.y + s.h) {
        return { role: s.role, ref: s.ref };
      }
    } else if (s.kind === "node") {
      if (p.x >= s.x && p.x <= s.x + s.size && p.y >= s.y && p.y <= s.y + s.size) {
        return { role: s.role, ref: s.ref };
      }
    }
  }
  return null;
}

/** Center of the glyph identified by (role, ref), for synthetic interaction. */
export function shapeCenter(shapes: Shape[], role: Role, ref: string): Point | null {
  for (const s of shapes) {
    if (s.role !== role || s.ref !== ref) continue;
    if (s.kind === "rect") return { x: s.x + s.w / 2, y: s.y + s.h / 2 };
    if (s.kind === "node") return { x: s.x + s.size / 2, y: s.y + s.size / 2 };
    if (s.kind === "cross") return { x: s.x, y: s.y };
    if (s.kind === "text") return { x: s.x, y: s.y };
  }
  return null;
}
