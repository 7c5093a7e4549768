/** Pure span-editing logic: snapping, clamping, and validation.
 *
 * Handle positions are absolute times; trims are stored relative to the
 * reported span. Dragging snaps to the nearest sample timestamp and is then
 * clamped so the handles never cross and at least one training window's
 * worth of signal survives (or the span's own full length, if it was
 * reported shorter than a window to begin with).
 */

import type { SampleGrid, SpanDoc } from "./types.js";

export const WINDOW_SAMPLES = 150;

export type Handle = "head" | "tail";

export function snapToSample(tMs: number, grid: SampleGrid): number {
  const clamped = Math.min(Math.max(tMs, grid.originMs), grid.lastMs);
  const steps = Math.round((clamped - grid.originMs) / grid.stepMs);
  return grid.originMs + steps * grid.stepMs;
}

export function windowLengthMs(grid: SampleGrid): number {
  return WINDOW_SAMPLES * grid.stepMs;
}

export function headHandleMs(span: SpanDoc): number {
  return span.start_ms + span.trim_head_ms;
}

export function tailHandleMs(span: SpanDoc): number {
  return span.stop_ms - span.trim_tail_ms;
}

/** Shortest interval the handles may enclose for this span. */
export function minSurvivingMs(span: SpanDoc, grid: SampleGrid): number {
  return Math.min(windowLengthMs(grid), span.stop_ms - span.start_ms);
}

/**
 * Move one trim handle toward tMs. Returns the updated span; the result
 * always satisfies trim_head_ms >= 0, trim_tail_ms >= 0 and
 * head handle + minimum interval <= tail handle.
 */
export function dragTrim(
  span: SpanDoc,
  handle: Handle,
  tMs: number,
  grid: SampleGrid,
): SpanDoc {
  const minSpan = minSurvivingMs(span, grid);
  let target = snapToSample(tMs, grid);
  if (handle === "head") {
    const limit = tailHandleMs(span) - minSpan;
    target = Math.min(Math.max(target, span.start_ms), Math.max(limit, span.start_ms));
    return { ...span, trim_head_ms: target - span.start_ms };
  }
  const limit = headHandleMs(span) + minSpan;
  target = Math.max(Math.min(target, span.stop_ms), Math.min(limit, span.stop_ms));
  return { ...span, trim_tail_ms: span.stop_ms - target };
}

export function withConfirmed(span: SpanDoc, confirmed: boolean): SpanDoc {
  return { ...span, confirmed };
}

export function withLabel(span: SpanDoc, label: string): SpanDoc {
  return { ...span, label: label.toLowerCase() };
}

/** Mirror of the service-side rules; returns a problem string or null. */
export function spanProblem(span: SpanDoc): string | null {
  if (!span.label) return "label is empty";
  if (!Number.isInteger(span.start_ms) || !Number.isInteger(span.stop_ms))
    return "start/stop must be integers";
  if (span.start_ms >= span.stop_ms) return "start must precede stop";
  if (span.trim_head_ms < 0 || span.trim_tail_ms < 0) return "negative trim";
  if (headHandleMs(span) >= tailHandleMs(span)) return "trims leave an empty interval";
  return null;
}

export function docProblem(spans: SpanDoc[]): string | null {
  for (let k = 0; k < spans.length; k++) {
    const problem = spanProblem(spans[k]!);
    if (problem) return `span ${k}: ${problem}`;
  }
  return null;
}
