/** Application bootstrap: open-document form, toolbar, canvas editor. */

import { Api } from "./api.js";
import { EditorController } from "./controller.js";

const api = new Api();
let controller: EditorController | null = null;

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function resizeCanvas(canvas: HTMLCanvasElement): void {
  const parent = canvas.parentElement!;
  canvas.width = parent.clientWidth;
  canvas.height = parent.clientHeight;
}

async function openDocument(): Promise<void> {
  const db = el<HTMLTextAreaElement>("db-input").value;
  const dbd = el<HTMLTextAreaElement>("dbd-input").value;
  const separator = el<HTMLInputElement>("separator-input").value || ":";
  const errorEl = el<HTMLElement>("open-error");
  errorEl.textContent = "";
  try {
    const opened = await api.open(db, dbd, separator);
    el<HTMLElement>("open-panel").style.display = "none";
    el<HTMLElement>("editor-panel").style.display = "flex";
    const canvas = el<HTMLCanvasElement>("canvas");
    resizeCanvas(canvas);
    controller?.stop();
    controller = new EditorController(
      api,
      opened.id,
      canvas,
      el("breadcrumb"),
      el("status"),
      el("diagnostics"),
      separator,
    );
    await controller.start();
  } catch (err) {
    errorEl.textContent = String(err);
  }
}

function prompt2(a: string, b: string): [string, string] | null {
  const first = window.prompt(a);
  if (first === null || first === "") return null;
  const second = window.prompt(b);
  if (second === null) return null;
  return [first, second];
}

function wireToolbar(): void {
  el("btn-open").onclick = () => void openDocument();
  el("btn-create").onclick = () => {
    const got = prompt2("Record type:", "Record name:");
    if (got) void controller?.createRecord(got[0], got[1]);
  };
  el("btn-rename").onclick = () => {
    if (!controller?.selectedRecord) return;
    const name = window.prompt(`Rename ${controller.selectedRecord} to:`);
    if (name) void controller.renameSelected(name);
  };
  el("btn-setfield").onclick = () => {
    if (!controller?.selectedRecord) return;
    const got = prompt2("Field name:", "Value:");
    if (got) void controller.setFieldOnSelected(got[0], got[1]);
  };
  el("btn-delete").onclick = () => void controller?.deleteSelected();
  el("btn-undo").onclick = () => void controller?.undo();
  el("btn-redo").onclick = () => void controller?.redo();
  el("btn-save").onclick = async () => {
    if (!controller) return;
    const text = await controller.downloadSource();
    const blob = new Blob([text], { type: "text/plain" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "database.db";
    a.click();
    URL.revokeObjectURL(a.href);
  };
}

window.addEventListener("resize", () => {
  const canvas = document.getElementById("canvas") as HTMLCanvasElement | null;
  if (canvas && canvas.offsetParent !== null) resizeCanvas(canvas);
});

wireToolbar();
