import type { RunParams, SegmentResponse, SessionInfo, Stroke } from "./types.js";

/** The server refused to segment because a seed class is missing. */
export class MissingClassError extends Error {}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function detailOf(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: string };
    return body.detail ?? res.statusText;
  } catch {
    return res.statusText;
  }
}

/** Thin client of the session service; all computation stays remote. */
export class SessionClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(
    image: Blob,
    config: Record<string, unknown> = {},
  ): Promise<SessionInfo> {
    const form = new FormData();
    form.append("image", image, "image.png");
    if (Object.keys(config).length) {
      form.append("config", JSON.stringify(config));
    }
    const res = await this.fetchFn(this.url("/sessions"), {
      method: "POST",
      body: form,
    });
    if (res.status !== 201) throw new ApiError(res.status, await detailOf(res));
    return (await res.json()) as SessionInfo;
  }

  async putScribbles(id: string, strokes: readonly Stroke[]): Promise<void> {
    const res = await this.fetchFn(this.url(`/sessions/${id}/scribbles`), {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ strokes }),
    });
    if (res.status !== 204) throw new ApiError(res.status, await detailOf(res));
  }

  async segment(id: string, params: RunParams): Promise<SegmentResponse> {
    const res = await this.fetchFn(this.url(`/sessions/${id}/segment`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    });
    if (res.status === 409) throw new MissingClassError(await detailOf(res));
    if (res.status !== 200) throw new ApiError(res.status, await detailOf(res));
    return (await res.json()) as SegmentResponse;
  }

  async deleteSession(id: string): Promise<void> {
    const res = await this.fetchFn(this.url(`/sessions/${id}`), {
      method: "DELETE",
    });
    if (res.status !== 204) throw new ApiError(res.status, await detailOf(res));
  }

  async health(): Promise<{ status: string; sessions: number }> {
    const res = await this.fetchFn(this.url("/healthz"));
    if (!res.ok) throw new ApiError(res.status, await detailOf(res));
    return (await res.json()) as { status: string; sessions: number };
  }
}
