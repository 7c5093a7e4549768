/** Typed client for the upload service. Read-only for signal data; the
 * only write path is the annotation document PUT. */

import type { AnnotationDoc, RecordingEntry, TraceResponse } from "./types.js";

export class ServiceUnreachable extends Error {}

export class ValidationRejected extends Error {
  constructor(public detail: string) {
    super(detail);
  }
}

export interface AnnotationsWithTag {
  doc: AnnotationDoc;
  etag: string | null;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ServiceUnreachable(`service unreachable: ${String(err)}`);
    }
    return response;
  }

  async listRecordings(): Promise<RecordingEntry[]> {
    const r = await this.request("/recordings");
    if (!r.ok) throw new ServiceUnreachable(`GET /recordings -> ${r.status}`);
    return (await r.json()) as RecordingEntry[];
  }

  async getTrace(
    recordingId: string,
    maxPoints?: number,
    range?: { t0Ms: number; t1Ms: number },
  ): Promise<TraceResponse> {
    const params = new URLSearchParams();
    if (maxPoints) params.set("max_points", String(maxPoints));
    if (range) {
      params.set("t0_ms", String(Math.floor(range.t0Ms)));
      params.set("t1_ms", String(Math.ceil(range.t1Ms)));
    }
    const query = params.size ? `?${params}` : "";
    const r = await this.request(`/recordings/${recordingId}/trace${query}`);
    if (r.status === 404) throw new ValidationRejected(`no recording ${recordingId}`);
    if (!r.ok) throw new ServiceUnreachable(`trace -> ${r.status}`);
    return (await r.json()) as TraceResponse;
  }

  async getAnnotations(recordingId: string): Promise<AnnotationsWithTag> {
    const r = await this.request(`/recordings/${recordingId}/annotations`);
    if (r.status === 404) throw new ValidationRejected(`no recording ${recordingId}`);
    if (!r.ok) throw new ServiceUnreachable(`annotations -> ${r.status}`);
    return { doc: (await r.json()) as AnnotationDoc, etag: r.headers.get("ETag") };
  }

  /** PUT the document; resolves to the new ETag. */
  async putAnnotations(recordingId: string, doc: AnnotationDoc): Promise<string | null> {
    const r = await this.request(`/recordings/${recordingId}/annotations`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc, null, 2),
    });
    if (r.status === 422 || r.status === 400) {
      let detail = `rejected (${r.status})`;
      try {
        const body = (await r.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* keep the generic detail */
      }
      throw new ValidationRejected(detail);
    }
    if (r.status === 404) throw new ValidationRejected(`no recording ${recordingId}`);
    if (!r.ok) throw new ServiceUnreachable(`PUT annotations -> ${r.status}`);
    return r.headers.get("ETag");
  }
}
