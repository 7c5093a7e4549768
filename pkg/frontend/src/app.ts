/** Controller: wires the recording list, trace chart, span editing panel,
 * and save/reload flow. Edits stay local until Save; failures keep them. */

import { ApiClient, ServiceUnreachable, ValidationRejected } from "./api.js";
import { TraceChart } from "./chart.js";
import {
  docProblem,
  dragTrim,
  headHandleMs,
  minSurvivingMs,
  tailHandleMs,
  withConfirmed,
  withLabel,
  type Handle,
} from "./model.js";
import { gridOf, type SampleGrid, type SpanDoc, type TraceResponse } from "./types.js";

interface Elements {
  recordingList: HTMLSelectElement;
  status: HTMLElement;
  spanPanel: HTMLElement;
  saveButton: HTMLButtonElement;
  reloadButton: HTMLButtonElement;
  retryButton: HTMLButtonElement;
  canvas: HTMLCanvasElement;
}

export class AnnotatorApp {
  private api: ApiClient;
  private chart: TraceChart;
  private trace: TraceResponse | null = null;
  private grid: SampleGrid | null = null;
  private spans: SpanDoc[] = [];
  private savedEtag: string | null = null;
  private selected = -1;
  private dirty = false;
  private classes: string[] = ["eating", "smoking", "medication", "jogging", "other"];
  private zoomTimer: number | undefined;

  constructor(private el: Elements, api?: ApiClient) {
    this.api = api ?? new ApiClient();
    this.chart = new TraceChart(el.canvas, {
      onDrag: (k, handle, tMs) => this.handleDrag(k, handle, tMs),
      onDragEnd: () => this.renderPanel(),
      onSelect: (k) => {
        this.selected = k;
        this.renderAll();
      },
      onViewChange: (range) => this.scheduleZoomFetch(range),
    });
    el.recordingList.addEventListener("change", () => {
      void this.loadRecording(el.recordingList.value);
    });
    el.saveButton.addEventListener("click", () => void this.save());
    el.reloadButton.addEventListener("click", () => {
      if (this.el.recordingList.value) void this.loadRecording(this.el.recordingList.value);
    });
    el.retryButton.addEventListener("click", () => void this.start());
    window.addEventListener("resize", () => this.chart.render());
  }

  async start(): Promise<void> {
    this.setStatus("loading recordings…", "info");
    this.el.retryButton.hidden = true;
    try {
      const classesResponse = await fetch("/classes").then((r) => r.json()).catch(() => null);
      if (classesResponse?.classes?.length) this.classes = classesResponse.classes;
      const recordings = await this.api.listRecordings();
      this.el.recordingList.innerHTML = "";
      for (const rec of recordings) {
        const option = document.createElement("option");
        option.value = rec.recording_id;
        option.textContent = `${rec.recording_id} (${rec.original_name})`;
        this.el.recordingList.appendChild(option);
      }
      if (recordings.length === 0) {
        this.setStatus("no recordings uploaded yet", "info");
        return;
      }
      await this.loadRecording(recordings[0]!.recording_id);
    } catch (err) {
      this.showError(err);
    }
  }

  async loadRecording(recordingId: string): Promise<void> {
    this.setStatus(`loading ${recordingId}…`, "info");
    try {
      this.trace = await this.api.getTrace(recordingId);
      this.grid = gridOf(this.trace);
      const { doc, etag } = await this.api.getAnnotations(recordingId);
      // stored documents may omit the optional fields; normalize them
      this.spans = doc.spans.map((s: Partial<SpanDoc>) => ({
        label: s.label ?? "other",
        start_ms: s.start_ms ?? 0,
        stop_ms: s.stop_ms ?? 0,
        trim_head_ms: s.trim_head_ms ?? 0,
        trim_tail_ms: s.trim_tail_ms ?? 0,
        confirmed: s.confirmed ?? false,
      }));
      this.savedEtag = etag;
      this.selected = this.spans.length ? 0 : -1;
      this.dirty = false;
      this.setStatus(
        `${this.trace.samples} samples at ${this.trace.rate_hz} Hz, ` +
          `${this.spans.length} span(s)`,
        "info",
      );
      this.renderAll();
    } catch (err) {
      this.showError(err);
    }
  }

  /** Refetch the visible range at full downsample budget, debounced so a
   * wheel gesture issues one request. */
  private scheduleZoomFetch(range: { t0Ms: number; t1Ms: number } | null): void {
    if (!this.trace) return;
    window.clearTimeout(this.zoomTimer);
    this.zoomTimer = window.setTimeout(() => {
      const id = this.trace!.recording_id;
      this.api
        .getTrace(id, undefined, range ?? undefined)
        .then((trace) => {
          if (this.trace?.recording_id !== id) return;
          this.trace = trace;
          this.chart.setData(trace, this.spans, this.selected);
        })
        .catch((err) => this.showError(err));
    }, 150);
  }

  private handleDrag(spanIndex: number, handle: Handle, tMs: number): void {
    if (!this.grid) return;
    const span = this.spans[spanIndex];
    if (!span) return;
    const updated = dragTrim(span, handle, tMs, this.grid);
    if (updated.trim_head_ms !== span.trim_head_ms || updated.trim_tail_ms !== span.trim_tail_ms) {
      this.spans[spanIndex] = updated;
      this.dirty = true;
      this.chart.setData(this.trace!, this.spans, this.selected);
    }
  }

  async save(): Promise<void> {
    if (!this.trace) return;
    const problem = docProblem(this.spans);
    if (problem) {
      this.setStatus(`cannot save: ${problem}`, "error");
      return;
    }
    try {
      const current = await this.api.getAnnotations(this.trace.recording_id);
      if (this.savedEtag && current.etag !== this.savedEtag) {
        this.setStatus(
          "server annotations changed since load; saving will overwrite them " +
            "(press Save again to proceed)",
          "error",
        );
        this.savedEtag = current.etag;
        return;
      }
      const etag = await this.api.putAnnotations(this.trace.recording_id, {
        spans: this.spans,
      });
      // show the stored server state, not the local buffer
      const stored = await this.api.getAnnotations(this.trace.recording_id);
      this.spans = stored.doc.spans;
      this.savedEtag = etag ?? stored.etag;
      this.dirty = false;
      this.setStatus("saved", "ok");
      this.renderAll();
    } catch (err) {
      if (err instanceof ValidationRejected) {
        this.setStatus(`server rejected: ${err.detail}`, "error");
      } else {
        this.showError(err, "edits kept locally; retry when the service is back");
      }
    }
  }

  private renderAll(): void {
    if (this.trace) this.chart.setData(this.trace, this.spans, this.selected);
    this.renderPanel();
  }

  private renderPanel(): void {
    const panel = this.el.spanPanel;
    panel.innerHTML = "";
    if (!this.grid) return;
    this.spans.forEach((span, k) => {
      const row = document.createElement("div");
      row.className = "span-row" + (k === this.selected ? " selected" : "");
      row.addEventListener("click", () => {
        this.selected = k;
        this.renderAll();
      });

      const label = document.createElement("select");
      for (const cls of this.classes) {
        const option = document.createElement("option");
        option.value = cls;
        option.textContent = cls;
        option.selected = cls === span.label;
        label.appendChild(option);
      }
      label.addEventListener("change", () => {
        this.spans[k] = withLabel(span, label.value);
        this.dirty = true;
        this.renderAll();
      });

      const confirm = document.createElement("input");
      confirm.type = "checkbox";
      confirm.checked = span.confirmed;
      confirm.addEventListener("change", () => {
        this.spans[k] = withConfirmed(this.spans[k]!, confirm.checked);
        this.dirty = true;
        this.renderAll();
      });

      const info = document.createElement("span");
      info.className = "span-info";
      const head = headHandleMs(span);
      const tail = tailHandleMs(span);
      info.textContent =
        `#${k} [${span.start_ms}–${span.stop_ms}] trims ${span.trim_head_ms}/` +
        `${span.trim_tail_ms} keeps ${head}–${tail} ` +
        `(min ${minSurvivingMs(span, this.grid!)} ms)`;

      const confirmLabel = document.createElement("label");
      confirmLabel.append(confirm, " confirmed");
      row.append(label, info, confirmLabel);
      panel.appendChild(row);
    });
    this.el.saveButton.disabled = !this.dirty;
  }

  private setStatus(text: string, kind: "info" | "ok" | "error"): void {
    this.el.status.textContent = text;
    this.el.status.className = `status ${kind}`;
  }

  private showError(err: unknown, suffix = ""): void {
    const message = err instanceof Error ? err.message : String(err);
    this.setStatus(suffix ? `${message} — ${suffix}` : message, "error");
    if (err instanceof ServiceUnreachable) this.el.retryButton.hidden = false;
  }
}
