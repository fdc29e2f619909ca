/** Thin client for the editor-service JSON API. */

import type { Command, Diagnostic, ViewModel } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface OpenResult {
  id: string;
  revision: number;
  diagnostics: Diagnostic[];
}

export interface CommandResult {
  revision: number;
  diagnostics: Diagnostic[];
}

async function asJson(resp: Response): Promise<any> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, body.code ?? "HttpError", body.message ?? resp.statusText);
  }
  return body;
}

export class Api {
  constructor(private readonly base = "") {}

  private post(path: string, payload?: unknown): Promise<Response> {
    return fetch(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
  }

  async health(): Promise<boolean> {
    try {
      return (await fetch(this.base + "/api/health")).ok;
    } catch {
      return false;
    }
  }

  async open(db: string, dbd?: string, separator?: string): Promise<OpenResult> {
    const payload: Record<string, string> = { db };
    if (dbd !== undefined && dbd !== "") payload.dbd = dbd;
    if (separator !== undefined) payload.separator = separator;
    return asJson(await this.post("/api/documents", payload));
  }

  async view(id: string, group = ""): Promise<ViewModel> {
    const query = group ? `?group=${encodeURIComponent(group)}` : "";
    return asJson(await fetch(`${this.base}/api/documents/${id}/view${query}`));
  }

  async command(id: string, cmd: Command, expectedRevision?: number): Promise<CommandResult> {
    const payload: Record<string, unknown> = { ...cmd };
    if (expectedRevision !== undefined) payload.expectedRevision = expectedRevision;
    return asJson(await this.post(`/api/documents/${id}/commands`, payload));
  }

  async undo(id: string): Promise<CommandResult> {
    return asJson(await this.post(`/api/documents/${id}/undo`));
  }

  async redo(id: string): Promise<CommandResult> {
    return asJson(await this.post(`/api/documents/${id}/redo`));
  }

  async source(id: string): Promise<string> {
    const resp = await fetch(`${this.base}/api/documents/${id}/source`);
    if (!resp.ok) throw new ApiError(resp.status, "HttpError", resp.statusText);
    return resp.text();
  }
}
