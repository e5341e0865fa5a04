/** Thin fetch client for the segmentation service. */

import type { ConfigOverrides, ScribblePayload, SegmentResponse, SessionInfo } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function raise(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class LapsegClient {
  constructor(private baseUrl: string = "") {}

  async health(): Promise<{ status: string }> {
    const response = await fetch(`${this.baseUrl}/api/health`);
    if (!response.ok) await raise(response);
    return response.json();
  }

  async createSession(image: Blob | ArrayBuffer): Promise<SessionInfo> {
    const response = await fetch(`${this.baseUrl}/api/sessions`, {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: image,
    });
    if (!response.ok) await raise(response);
    return response.json();
  }

  async segment(
    sessionId: string, scribbles: ScribblePayload, config?: ConfigOverrides,
  ): Promise<SegmentResponse> {
    const response = await fetch(`${this.baseUrl}/api/sessions/${sessionId}/segment`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config ? { scribbles, config } : { scribbles }),
    });
    if (!response.ok) await raise(response);
    return response.json();
  }

  async getResult(sessionId: string): Promise<SegmentResponse | null> {
    const response = await fetch(`${this.baseUrl}/api/sessions/${sessionId}/result`);
    if (response.status === 204) return null;
    if (!response.ok) await raise(response);
    return response.json();
  }
}
