/** Canvas scene state: viewport transform and group navigation. */

import type { Point } from "./display.js";

export interface Viewport {
  panX: number;
  panY: number;
  zoom: number;
}

export type DragState =
  | { kind: "pan"; lastX: number; lastY: number }
  | { kind: "record"; name: string; startX: number; startY: number; dx: number; dy: number }
  | { kind: "connector"; id: string; startX: number; startY: number; dx: number; dy: number }
  | { kind: "linkDraw"; source: string; from: Point; to: Point };

export interface CanvasScene {
  viewport: Viewport;
  groupPath: string;
  separator: string;
  selection: Set<string>;
  dragState: DragState | null;
}

export function createScene(separator = ":"): CanvasScene {
  return {
    viewport: { panX: 0, panY: 0, zoom: 1 },
    groupPath: "",
    separator,
    selection: new Set(),
    dragState: null,
  };
}

export function worldToScreen(v: Viewport, p: Point): Point {
  return { x: (p.x - v.panX) * v.zoom, y: (p.y - v.panY) * v.zoom };
}

export function screenToWorld(v: Viewport, p: Point): Point {
  return { x: p.x / v.zoom + v.panX, y: p.y / v.zoom + v.panY };
}

/** Zoom by `factor` keeping the screen point `anchor` fixed. */
export function zoomAt(v: Viewport, anchor: Point, factor: number): Viewport {
  const zoom = Math.min(8, Math.max(0.05, v.zoom * factor));
  const world = screenToWorld(v, anchor);
  return {
    zoom,
    panX: world.x - anchor.x / zoom,
    panY: world.y - anchor.y / zoom,
  };
}

/** Descend into a child group (double-click on its glyph). */
export function descendGroup(scene: CanvasScene, name: string): string {
  scene.groupPath = scene.groupPath
    ? scene.groupPath + scene.separator + name
    : name;
  return scene.groupPath;
}

/** Breadcrumb segments; index 0 is the root. */
export function breadcrumb(scene: CanvasScene): string[] {
  const parts = scene.groupPath ? scene.groupPath.split(scene.separator) : [];
  return ["(root)", ...parts];
}

/** Ascend to the breadcrumb entry at `index` (0 = root). */
export function ascendTo(scene: CanvasScene, index: number): string {
  const parts = scene.groupPath ? scene.groupPath.split(scene.separator) : [];
  scene.groupPath = parts.slice(0, index).join(scene.separator);
  return scene.groupPath;
}
