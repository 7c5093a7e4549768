/** Wire types matching the upload service's JSON schemas. */

export interface SpanDoc {
  label: string;
  start_ms: number;
  stop_ms: number;
  trim_head_ms: number;
  trim_tail_ms: number;
  confirmed: boolean;
}

export interface AnnotationDoc {
  spans: SpanDoc[];
}

export interface TraceResponse {
  recording_id: string;
  samples: number;
  rate_hz: number;
  t_ms: number[];
  x: number[];
  y: number[];
  z: number[];
  spans: SpanDoc[];
  t_first_ms: number;
  t_last_ms: number;
  /** bounds of the (possibly zoomed) range this payload covers */
  view_t0_ms?: number;
  view_t1_ms?: number;
}

export interface RecordingEntry {
  recording_id: string;
  original_name: string;
  assigned_name: string;
  size_bytes: number;
  received_ms: number;
}

/** Uniform sample grid reconstructed from a trace header. */
export interface SampleGrid {
  originMs: number;
  stepMs: number;
  lastMs: number;
}

export function gridOf(trace: Pick<TraceResponse, "rate_hz" | "t_first_ms" | "t_last_ms">): SampleGrid {
  return {
    originMs: trace.t_first_ms,
    stepMs: Math.round(1000 / trace.rate_hz),
    lastMs: trace.t_last_ms,
  };
}
