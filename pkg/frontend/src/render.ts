/** Draw a display list onto a 2D canvas context under a viewport transform. */

import type { Shape } from "./display.js";
import type { Viewport } from "./scene.js";

export function drawShapes(
  ctx: CanvasRenderingContext2D,
  shapes: Shape[],
  viewport: Viewport,
  width: number,
  height: number,
): void {
  ctx.setTransform(1, 0, 0, 1, 0, 0);
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, width, height);
  ctx.setTransform(
    viewport.zoom, 0, 0, viewport.zoom,
    -viewport.panX * viewport.zoom, -viewport.panY * viewport.zoom,
  );

  for (const s of shapes) {
    switch (s.kind) {
      case "rect":
        if (s.fill) {
          ctx.fillStyle = s.fill;
          ctx.fillRect(s.x, s.y, s.w, s.h);
        }
        if (s.stroke || !s.fill) {
          ctx.strokeStyle = s.stroke ?? "#000000";
          ctx.lineWidth = 1 / viewport.zoom;
          ctx.strokeRect(s.x, s.y, s.w, s.h);
        }
        break;
      case "text":
        ctx.fillStyle = s.color ?? "#000000";
        ctx.font = `${s.bold ? "bold " : ""}${s.size}px sans-serif`;
        ctx.fillText(s.text, s.x, s.y);
        break;
      case "line":
        ctx.strokeStyle = s.color ?? "#000000";
        ctx.lineWidth = 1 / viewport.zoom;
        ctx.beginPath();
        ctx.moveTo(s.x1, s.y1);
        ctx.lineTo(s.x2, s.y2);
        ctx.stroke();
        break;
      case "polyline": {
        ctx.strokeStyle = s.color ?? "#000000";
        ctx.lineWidth = 1.5 / viewport.zoom;
        ctx.setLineDash(s.dashed ? [5, 3] : []);
        ctx.beginPath();
        s.points.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
        ctx.stroke();
        ctx.setLineDash([]);
        break;
      }
      case "node": {
        ctx.fillStyle = "#ffffff";
        ctx.fillRect(s.x, s.y, s.size, s.size);
        ctx.strokeStyle = "#000000";
        ctx.lineWidth = 1 / viewport.zoom;
        ctx.strokeRect(s.x, s.y, s.size, s.size);
        const cx = s.x + s.size / 2;
        const cy = s.y + s.size / 2;
        const r = s.size * 0.3;
        ctx.fillStyle = s.color;
        ctx.beginPath();
        if (s.glyph === "circle") {
          ctx.arc(cx, cy, r, 0, 2 * Math.PI);
        } else if (s.glyph === "in-arrow") {
          ctx.moveTo(s.x + 1, cy - r);
          ctx.lineTo(cx + r, cy);
          ctx.lineTo(s.x + 1, cy + r);
        } else {
          ctx.moveTo(cx - r, cy - r);
          ctx.lineTo(s.x + s.size - 1, cy);
          ctx.lineTo(cx - r, cy + r);
        }
        ctx.closePath();
        ctx.fill();
        break;
      }
      case "cross": {
        const r = s.size / 2;
        ctx.strokeStyle = s.color;
        ctx.lineWidth = 2 / viewport.zoom;
        ctx.beginPath();
        ctx.moveTo(s.x - r, s.y - r);
        ctx.lineTo(s.x + r, s.y + r);
        ctx.moveTo(s.x + r, s.y - r);
        ctx.lineTo(s.x - r, s.y + r);
        ctx.stroke();
        break;
      }
    }
  }
  ctx.setTransform(1, 0, 0, 1, 0, 0);
}
