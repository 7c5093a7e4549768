/** Canvas renderer for three aligned acceleration traces with span
 * overlays and draggable trim handles. */

import { headHandleMs, tailHandleMs, type Handle } from "./model.js";
import type { SpanDoc, TraceResponse } from "./types.js";

const AXIS_COLORS = ["#c0392b", "#27ae60", "#2980b9"];
const AXIS_NAMES = ["x", "y", "z"];
const MARGIN = { left: 52, right: 16, top: 10, bottom: 24 };
const HANDLE_GRAB_PX = 7;

export interface DragStart {
  spanIndex: number;
  handle: Handle;
}

export interface ChartCallbacks {
  onDrag(spanIndex: number, handle: Handle, tMs: number): void;
  onDragEnd(): void;
  onSelect(spanIndex: number): void;
  /** null = reset to the full recording */
  onViewChange(range: { t0Ms: number; t1Ms: number } | null): void;
}

const MIN_VIEW_MS = 2000;

export class TraceChart {
  private trace: TraceResponse | null = null;
  private spans: SpanDoc[] = [];
  private selected = -1;
  private dragging: DragStart | null = null;
  private ctx: CanvasRenderingContext2D;
  private viewT0 = 0;
  private viewT1 = 1;

  constructor(
    private canvas: HTMLCanvasElement,
    private callbacks: ChartCallbacks,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.pointerUp(e));
    canvas.addEventListener("pointercancel", () => this.pointerCancel());
    canvas.addEventListener("wheel", (e) => this.wheel(e), { passive: false });
    canvas.addEventListener("dblclick", () => this.callbacks.onViewChange(null));
  }

  setData(trace: TraceResponse, spans: SpanDoc[], selected: number): void {
    this.trace = trace;
    this.spans = spans;
    this.selected = selected;
    this.viewT0 = trace.view_t0_ms ?? trace.t_first_ms;
    this.viewT1 = trace.view_t1_ms ?? trace.t_last_ms;
    this.render();
  }

  private get plotWidth(): number {
    return this.canvas.clientWidth - MARGIN.left - MARGIN.right;
  }

  private tToPx(tMs: number): number {
    const frac = (tMs - this.viewT0) / Math.max(1, this.viewT1 - this.viewT0);
    return MARGIN.left + frac * this.plotWidth;
  }

  pxToT(px: number): number {
    const frac = (px - MARGIN.left) / Math.max(1, this.plotWidth);
    return this.viewT0 + frac * (this.viewT1 - this.viewT0);
  }

  private wheel(e: WheelEvent): void {
    if (!this.trace) return;
    e.preventDefault();
    const rect = this.canvas.getBoundingClientRect();
    const anchor = this.pxToT(e.clientX - rect.left);
    const factor = e.deltaY > 0 ? 1.25 : 0.8;
    const width = Math.max(MIN_VIEW_MS, (this.viewT1 - this.viewT0) * factor);
    let t0 = anchor - (anchor - this.viewT0) * (width / (this.viewT1 - this.viewT0));
    let t1 = t0 + width;
    const { t_first_ms, t_last_ms } = this.trace;
    if (t0 < t_first_ms) {
      t1 += t_first_ms - t0;
      t0 = t_first_ms;
    }
    if (t1 > t_last_ms) {
      t0 = Math.max(t_first_ms, t0 - (t1 - t_last_ms));
      t1 = t_last_ms;
    }
    if (t0 <= t_first_ms && t1 >= t_last_ms) this.callbacks.onViewChange(null);
    else this.callbacks.onViewChange({ t0Ms: t0, t1Ms: t1 });
  }

  private laneBox(lane: number): { y0: number; h: number } {
    const usable = this.canvas.clientHeight - MARGIN.top - MARGIN.bottom;
    const h = usable / 3;
    return { y0: MARGIN.top + lane * h, h: h - 8 };
  }

  render(): void {
    const { canvas, ctx } = this;
    const dpr = window.devicePixelRatio || 1;
    if (canvas.width !== canvas.clientWidth * dpr) {
      canvas.width = canvas.clientWidth * dpr;
      canvas.height = canvas.clientHeight * dpr;
    }
    ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
    ctx.clearRect(0, 0, canvas.clientWidth, canvas.clientHeight);
    if (!this.trace) return;
    const series = [this.trace.x, this.trace.y, this.trace.z];
    for (let lane = 0; lane < 3; lane++) this.renderLane(lane, series[lane]!);
    this.renderTimeAxis();
    // spans and handles clip to the plot area so zoomed views stay tidy
    ctx.save();
    ctx.beginPath();
    ctx.rect(MARGIN.left, 0, this.plotWidth, canvas.clientHeight);
    ctx.clip();
    for (let k = 0; k < this.spans.length; k++) this.renderSpan(k);
    ctx.restore();
  }

  private renderLane(lane: number, values: number[]): void {
    const { ctx } = this;
    const { y0, h } = this.laneBox(lane);
    const t = this.trace!.t_ms;
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of values) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    if (!(hi > lo)) {
      lo -= 1;
      hi += 1;
    }
    const yOf = (v: number) => y0 + h - ((v - lo) / (hi - lo)) * h;
    ctx.strokeStyle = "#d5dbe1";
    ctx.strokeRect(MARGIN.left, y0, this.plotWidth, h);
    ctx.fillStyle = "#5f6b76";
    ctx.font = "12px system-ui, sans-serif";
    ctx.fillText(`${AXIS_NAMES[lane]} (m/s²)`, 8, y0 + 14);
    ctx.fillText(hi.toFixed(1), 8, y0 + 26);
    ctx.fillText(lo.toFixed(1), 8, y0 + h - 2);
    ctx.save();
    ctx.beginPath();
    ctx.rect(MARGIN.left, y0, this.plotWidth, h);
    ctx.clip();
    ctx.beginPath();
    for (let k = 0; k < t.length; k++) {
      const px = this.tToPx(t[k]!);
      const py = yOf(values[k]!);
      if (k === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    }
    ctx.strokeStyle = AXIS_COLORS[lane]!;
    ctx.lineWidth = 1;
    ctx.stroke();
    ctx.restore();
  }

  private renderTimeAxis(): void {
    const { ctx } = this;
    const y = this.canvas.clientHeight - MARGIN.bottom + 14;
    const origin = this.trace!.t_first_ms;
    ctx.fillStyle = "#5f6b76";
    ctx.font = "12px system-ui, sans-serif";
    const ticks = 6;
    for (let k = 0; k <= ticks; k++) {
      const tMs = this.viewT0 + ((this.viewT1 - this.viewT0) * k) / ticks;
      const label = `${((tMs - origin) / 1000).toFixed(1)}s`;
      ctx.fillText(label, this.tToPx(tMs) - 10, y);
    }
  }

  private renderSpan(index: number): void {
    const { ctx } = this;
    const span = this.spans[index]!;
    const isSelected = index === this.selected;
    const top = MARGIN.top;
    const bottom = this.canvas.clientHeight - MARGIN.bottom - 8;
    const x0 = this.tToPx(span.start_ms);
    const x1 = this.tToPx(span.stop_ms);
    ctx.fillStyle = span.confirmed ? "rgba(39,174,96,0.10)" : "rgba(241,196,15,0.12)";
    ctx.fillRect(x0, top, x1 - x0, bottom - top);
    const head = this.tToPx(headHandleMs(span));
    const tail = this.tToPx(tailHandleMs(span));
    ctx.fillStyle = isSelected ? "rgba(142,68,173,0.16)" : "rgba(127,140,141,0.10)";
    ctx.fillRect(head, top, tail - head, bottom - top);
    for (const [px, handle] of [
      [head, "head"],
      [tail, "tail"],
    ] as const) {
      ctx.strokeStyle = isSelected ? "#8e44ad" : "#7f8c8d";
      ctx.lineWidth = handle === this.dragging?.handle && isSelected ? 3 : 2;
      ctx.beginPath();
      ctx.moveTo(px, top);
      ctx.lineTo(px, bottom);
      ctx.stroke();
      ctx.fillStyle = ctx.strokeStyle;
      ctx.fillRect(px - 4, handle === "head" ? top : bottom - 10, 8, 10);
    }
    ctx.fillStyle = "#34495e";
    ctx.font = "12px system-ui, sans-serif";
    ctx.fillText(`${index}:${span.label}${span.confirmed ? " ✓" : ""}`, x0 + 3, top + 12);
  }

  /** Find a grabbable handle near the pointer, preferring the selected span. */
  private hitTest(px: number): DragStart | null {
    if (!this.trace) return null;
    const order = [...this.spans.keys()].sort((a, b) =>
      (a === this.selected ? -1 : 0) - (b === this.selected ? -1 : 0),
    );
    for (const index of order) {
      const span = this.spans[index]!;
      const candidates: [number, Handle][] = [
        [this.tToPx(headHandleMs(span)), "head"],
        [this.tToPx(tailHandleMs(span)), "tail"],
      ];
      for (const [hx, handle] of candidates) {
        if (Math.abs(px - hx) <= HANDLE_GRAB_PX) return { spanIndex: index, handle };
      }
    }
    return null;
  }

  private pointerDown(e: PointerEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const px = e.clientX - rect.left;
    const hit = this.hitTest(px);
    if (hit) {
      this.dragging = hit;
      this.canvas.setPointerCapture(e.pointerId);
      this.callbacks.onSelect(hit.spanIndex);
      return;
    }
    // clicking inside a span selects it
    if (this.trace) {
      const tMs = this.pxToT(px);
      const inside = this.spans.findIndex(
        (s) => s.start_ms <= tMs && tMs <= s.stop_ms,
      );
      if (inside >= 0) this.callbacks.onSelect(inside);
    }
  }

  private pointerMove(e: PointerEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const px = e.clientX - rect.left;
    if (this.dragging) {
      this.callbacks.onDrag(this.dragging.spanIndex, this.dragging.handle, this.pxToT(px));
      return;
    }
    this.canvas.style.cursor = this.hitTest(px) ? "ew-resize" : "default";
  }

  private pointerUp(e: PointerEvent): void {
    if (this.dragging) {
      this.dragging = null;
      this.canvas.releasePointerCapture(e.pointerId);
      this.callbacks.onDragEnd();
    }
  }

  private pointerCancel(): void {
    if (this.dragging) {
      this.dragging = null;
      this.callbacks.onDragEnd();
    }
  }
}
