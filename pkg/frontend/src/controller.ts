/** Interactive editor: wires DOM events to scene state and API commands.
 *
 * Concurrency model: single event loop, at most one in-flight mutation;
 * every mutation (or 409) is followed by a view re-fetch so the canvas
 * always renders server truth. The client polls the revision at 1 Hz.
 */

import { Api, ApiError } from "./api.js";
import {
  buildDisplayList,
  fieldNodeCenter,
  hitTest,
  Shape,
} from "./display.js";
import { drawShapes } from "./render.js";
import {
  ascendTo,
  breadcrumb,
  CanvasScene,
  createScene,
  descendGroup,
  screenToWorld,
  zoomAt,
} from "./scene.js";
import type { Command, ViewModel } from "./types.js";

const POLL_INTERVAL_MS = 1000;
const CLICK_SLOP = 3;

export class EditorController {
  private scene: CanvasScene = createScene();
  private view: ViewModel | null = null;
  private shapes: Shape[] = [];
  private mutationInFlight = false;
  private pollTimer: number | undefined;

  constructor(
    private readonly api: Api,
    private readonly docId: string,
    private readonly canvas: HTMLCanvasElement,
    private readonly breadcrumbEl: HTMLElement,
    private readonly statusEl: HTMLElement,
    private readonly diagnosticsEl: HTMLElement,
    separator = ":",
  ) {
    this.scene = createScene(separator);
    this.bindEvents();
  }

  async start(): Promise<void> {
    await this.refresh();
    if (this.view && this.view.records.length > 0) {
      // Center the initial viewport on the content.
      const xs = this.view.records.map((r) => r.x);
      const ys = this.view.records.map((r) => r.y);
      this.scene.viewport.panX = Math.min(...xs) - 60;
      this.scene.viewport.panY = Math.min(...ys) - 60;
    }
    this.redraw();
    this.pollTimer = window.setInterval(() => void this.poll(), POLL_INTERVAL_MS);
  }

  stop(): void {
    if (this.pollTimer !== undefined) window.clearInterval(this.pollTimer);
  }

  private async poll(): Promise<void> {
    if (this.mutationInFlight || this.scene.dragState || !this.view) return;
    try {
      const fresh = await this.api.view(this.docId, this.scene.groupPath);
      if (fresh.revision !== this.view.revision) {
        this.view = fresh;
        this.redraw();
      }
    } catch {
      this.setStatus("connection lost; retrying", true);
    }
  }

  private async refresh(): Promise<void> {
    try {
      this.view = await this.api.view(this.docId, this.scene.groupPath);
      this.renderDiagnostics();
      this.redraw();
    } catch (err) {
      this.setStatus(this.describe(err), true);
    }
  }

  /** Post one command; on any failure re-fetch so local state converges. */
  private async send(cmd: Command): Promise<boolean> {
    if (this.mutationInFlight) return false;
    this.mutationInFlight = true;
    try {
      await this.api.command(this.docId, cmd, this.view?.revision);
      this.setStatus(cmd.kind + " ok", false);
      return true;
    } catch (err) {
      this.setStatus(this.describe(err), true);
      return false;
    } finally {
      this.mutationInFlight = false;
      await this.refresh();
    }
  }

  private describe(err: unknown): string {
    if (err instanceof ApiError) return `${err.code}: ${err.message}`;
    return String(err);
  }

  private setStatus(text: string, isError: boolean): void {
    this.statusEl.textContent = text;
    this.statusEl.className = isError ? "status error" : "status";
  }

  private renderDiagnostics(): void {
    this.diagnosticsEl.textContent = "";
    for (const d of this.view?.diagnostics ?? []) {
      const li = document.createElement("li");
      li.className = d.severity.toLowerCase();
      li.textContent = `${d.severity} ${d.code} ${d.message}`;
      this.diagnosticsEl.appendChild(li);
    }
  }

  private renderBreadcrumb(): void {
    this.breadcrumbEl.textContent = "";
    breadcrumb(this.scene).forEach((label, index) => {
      if (index > 0) this.breadcrumbEl.append(" / ");
      const a = document.createElement("a");
      a.href = "#";
      a.textContent = label;
      a.onclick = (e) => {
        e.preventDefault();
        ascendTo(this.scene, index);
        void this.refresh();
      };
      this.breadcrumbEl.appendChild(a);
    });
  }

  private redraw(): void {
    if (!this.view) return;
    this.shapes = buildDisplayList(this.view);
    const extra: Shape[] = [];
    const drag = this.scene.dragState;
    if (drag?.kind === "linkDraw") {
      extra.push({
        kind: "polyline",
        role: "decor",
        points: [drag.from, drag.to],
        color: "#888888",
        dashed: true,
      });
    }
    const ctx = this.canvas.getContext("2d")!;
    drawShapes(ctx, [...this.shapes, ...extra], this.scene.viewport,
               this.canvas.width, this.canvas.height);
    this.renderBreadcrumb();
  }

  private pointerWorld(ev: MouseEvent) {
    const rect = this.canvas.getBoundingClientRect();
    return screenToWorld(this.scene.viewport, {
      x: ev.clientX - rect.left,
      y: ev.clientY - rect.top,
    });
  }

  private bindEvents(): void {
    this.canvas.addEventListener("pointerdown", (ev) => this.onPointerDown(ev));
    this.canvas.addEventListener("pointermove", (ev) => this.onPointerMove(ev));
    this.canvas.addEventListener("pointerup", (ev) => void this.onPointerUp(ev));
    this.canvas.addEventListener("dblclick", (ev) => void this.onDoubleClick(ev));
    this.canvas.addEventListener("wheel", (ev) => this.onWheel(ev), { passive: false });
    window.addEventListener("keydown", (ev) => void this.onKeyDown(ev));
  }

  private onPointerDown(ev: PointerEvent): void {
    if (!this.view) return;
    this.canvas.setPointerCapture(ev.pointerId);
    const p = this.pointerWorld(ev);
    const hit = hitTest(this.shapes, p);
    if (hit?.role === "fieldNode") {
      const rec = this.view.records.find((r) => hit.ref.startsWith(r.name + "."));
      const field = hit.ref.slice(hit.ref.lastIndexOf(".") + 1);
      const kind = rec?.fieldNodes.find((n) => n.field === field)?.kind;
      if (kind && kind !== "VARIABLE") {
        const from = fieldNodeCenter(this.view, hit.ref) ?? p;
        this.scene.dragState = { kind: "linkDraw", source: hit.ref, from, to: p };
      } else {
        this.canvas.style.cursor = "not-allowed"; // VARIABLE cannot be a source
      }
    } else if (hit?.role === "record") {
      this.scene.dragState = { kind: "record", name: hit.ref, startX: p.x, startY: p.y, dx: 0, dy: 0 };
    } else if (hit?.role === "connector") {
      this.scene.dragState = { kind: "connector", id: hit.ref, startX: p.x, startY: p.y, dx: 0, dy: 0 };
    } else {
      this.scene.dragState = { kind: "pan", lastX: ev.clientX, lastY: ev.clientY };
    }
  }

  private onPointerMove(ev: PointerEvent): void {
    const drag = this.scene.dragState;
    if (!drag || !this.view) return;
    if (drag.kind === "pan") {
      this.scene.viewport.panX -= (ev.clientX - drag.lastX) / this.scene.viewport.zoom;
      this.scene.viewport.panY -= (ev.clientY - drag.lastY) / this.scene.viewport.zoom;
      drag.lastX = ev.clientX;
      drag.lastY = ev.clientY;
    } else {
      const p = this.pointerWorld(ev);
      if (drag.kind === "linkDraw") {
        drag.to = p;
      } else {
        // Optimistic: move the glyph locally; the command is posted on drop.
        const dx = Math.round(p.x - drag.startX);
        const dy = Math.round(p.y - drag.startY);
        if (drag.kind === "record") {
          const rec = this.view.records.find((r) => r.name === drag.name);
          if (rec) {
            rec.x += dx - drag.dx;
            rec.y += dy - drag.dy;
          }
        } else {
          for (const link of this.view.links) {
            const w = link.waypoints.find((w) => w.id === drag.id);
            if (w) {
              w.x += dx - drag.dx;
              w.y += dy - drag.dy;
            }
          }
        }
        drag.dx = dx;
        drag.dy = dy;
      }
    }
    this.redraw();
  }

  private async onPointerUp(ev: PointerEvent): Promise<void> {
    const drag = this.scene.dragState;
    this.scene.dragState = null;
    this.canvas.style.cursor = "default";
    if (!drag || !this.view) return;
    if (drag.kind === "record") {
      if (Math.abs(drag.dx) > CLICK_SLOP || Math.abs(drag.dy) > CLICK_SLOP) {
        await this.send({ kind: "MoveRecord", name: drag.name, dx: drag.dx, dy: drag.dy });
      } else {
        this.scene.selection = new Set([drag.name]);
        this.redraw();
      }
    } else if (drag.kind === "connector") {
      if (drag.dx !== 0 || drag.dy !== 0) {
        await this.send({ kind: "MoveConnector", id: drag.id, dx: drag.dx, dy: drag.dy });
      }
    } else if (drag.kind === "linkDraw") {
      const hit = hitTest(this.shapes, this.pointerWorld(ev));
      if (hit?.role === "fieldNode" && hit.ref !== drag.source) {
        // ".VAL" is elided: "rec.VAL" is written as just "rec".
        const target = hit.ref.endsWith(".VAL")
          ? hit.ref.slice(0, -".VAL".length)
          : hit.ref;
        await this.send({ kind: "SetLink", source: drag.source, target });
      } else {
        this.redraw(); // cancelled: drop the rubber band, no command
      }
    }
  }

  private async onDoubleClick(ev: MouseEvent): Promise<void> {
    const hit = hitTest(this.shapes, this.pointerWorld(ev));
    if (hit?.role === "group") {
      descendGroup(this.scene, hit.ref);
      await this.refresh();
    }
  }

  private onWheel(ev: WheelEvent): void {
    ev.preventDefault();
    const rect = this.canvas.getBoundingClientRect();
    const anchor = { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
    this.scene.viewport = zoomAt(this.scene.viewport, anchor, ev.deltaY < 0 ? 1.15 : 1 / 1.15);
    this.redraw();
  }

  private async onKeyDown(ev: KeyboardEvent): Promise<void> {
    if (!(ev.ctrlKey || ev.metaKey)) return;
    if (ev.key === "z" && !ev.shiftKey) {
      ev.preventDefault();
      await this.undo();
    } else if (ev.key === "y" || (ev.key === "z" && ev.shiftKey)) {
      ev.preventDefault();
      await this.redo();
    }
  }

  async undo(): Promise<void> {
    try {
      await this.api.undo(this.docId);
      this.setStatus("undo ok", false);
    } catch (err) {
      this.setStatus(this.describe(err), true);
    }
    await this.refresh();
  }

  async redo(): Promise<void> {
    try {
      await this.api.redo(this.docId);
      this.setStatus("redo ok", false);
    } catch (err) {
      this.setStatus(this.describe(err), true);
    }
    await this.refresh();
  }

  // Dialog-driven edits; each submission maps to exactly one command.

  async createRecord(type: string, name: string): Promise<void> {
    await this.send({ kind: "CreateRecord", type, name });
  }

  async renameSelected(newName: string): Promise<void> {
    const old = [...this.scene.selection][0];
    if (old) await this.send({ kind: "RenameRecord", old, new: newName });
  }

  async setFieldOnSelected(field: string, value: string): Promise<void> {
    const record = [...this.scene.selection][0];
    if (record) await this.send({ kind: "SetField", record, field, value });
  }

  async deleteSelected(): Promise<void> {
    const name = [...this.scene.selection][0];
    if (name) {
      this.scene.selection.clear();
      await this.send({ kind: "DeleteRecord", name });
    }
  }

  get selectedRecord(): string | undefined {
    return [...this.scene.selection][0];
  }

  async downloadSource(): Promise<string> {
    return this.api.source(this.docId);
  }
}
