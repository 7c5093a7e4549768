"""Local upload and annotation service.

Mirrors the collection flow: phones POST zipped recording/annotation pairs
to /upload, each stored under a unique name in an append-only store, and the
annotation console reads traces and reads/writes annotation documents
through the /recordings endpoints. Trace responses are downsampled with
shared-bin min/max decimation so peaks survive plotting.
"""

from __future__ import annotations

import io
import json
import os
import secrets
import threading
import time
import zipfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import PipelineError
from .ingest import (
    DEFAULT_CLASS_SET,
    RawRecording,
    parse_annotations,
    parse_recording,
)
from .manifest import atomic_write_text

STORE_ENV = "HARLSTM_STORE"
UI_ENV = "HARLSTM_UI"
MAX_TRACE_POINTS = 5000


def downsample_minmax(
    t_ms: np.ndarray, values: np.ndarray, max_points: int = MAX_TRACE_POINTS
) -> tuple[np.ndarray, np.ndarray]:
    """Shared-bin min/max decimation to at most ``max_points`` per axis.

    Returns (t, series) where series is [n x 3]; each bin contributes two
    points carrying every axis's bin minimum and maximum, so extremes are
    never lost. Short inputs pass through untouched.
    """
    n = len(t_ms)
    if n <= max_points:
        return t_ms, values
    bins = max(1, max_points // 2)
    edges = np.linspace(0, n, bins + 1, dtype=np.int64)
    t_out = np.empty(2 * bins, dtype=np.int64)
    v_out = np.empty((2 * bins, values.shape[1]), dtype=values.dtype)
    for b in range(bins):
        lo, hi = edges[b], edges[b + 1]
        chunk = values[lo:hi]
        t_out[2 * b] = t_ms[lo]
        t_out[2 * b + 1] = t_ms[hi - 1]
        v_out[2 * b] = chunk.min(axis=0)
        v_out[2 * b + 1] = chunk.max(axis=0)
    return t_out, v_out


class UploadStore:
    """Append-only upload store plus mutable per-recording working copies."""

    def __init__(self, root, class_set=DEFAULT_CLASS_SET):
        self.root = Path(root)
        self.class_set = tuple(class_set)
        self.uploads_dir = self.root / "uploads"
        self.recordings_dir = self.root / "recordings"
        self.log_path = self.root / "uploads.log"
        self.uploads_dir.mkdir(parents=True, exist_ok=True)
        self.recordings_dir.mkdir(parents=True, exist_ok=True)
        self._log_lock = threading.Lock()

    def _assign_name(self, suffix: str) -> tuple[str, Path]:
        # timestamp + random hex; exclusive create guards concurrent uploads
        while True:
            name = f"{int(time.time() * 1000)}_{secrets.token_hex(3)}"
            path = self.uploads_dir / f"{name}{suffix}"
            try:
                fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                continue
            os.close(fd)
            return name, path

    def accept_upload(self, original_name: str, blob: bytes) -> dict:
        """Validate and store one zipped recording/annotation pair."""
        try:
            zf = zipfile.ZipFile(io.BytesIO(blob))
            members = [m for m in zf.namelist() if not m.endswith("/")]
        except zipfile.BadZipFile as exc:
            raise ValueError(f"not a zip archive: {exc}") from exc
        recording_text = annotation_text = None
        recording_member = annotation_member = None
        for member in members:
            data = zf.read(member)
            try:
                text = data.decode("utf-8")
            except UnicodeDecodeError:
                continue
            if recording_text is None:
                try:
                    parse_recording(text)
                    recording_text, recording_member = text, member
                    continue
                except PipelineError:
                    pass
            if annotation_text is None:
                try:
                    parse_annotations(text, self.class_set)
                    annotation_text, annotation_member = text, member
                except PipelineError:
                    pass
        if recording_text is None or annotation_text is None:
            raise ValueError(
                "zip must contain one recording CSV and one annotation JSON; "
                f"members: {members}"
            )
        suffix = Path(original_name).suffix or ".zip"
        rec_id, zip_path = self._assign_name(suffix)
        with open(zip_path, "wb") as fh:
            fh.write(blob)
        rec_dir = self.recordings_dir / rec_id
        rec_dir.mkdir(parents=True, exist_ok=True)
        atomic_write_text(rec_dir / "recording.csv", recording_text)
        atomic_write_text(rec_dir / "annotations.json", annotation_text)
        record = {
            "recording_id": rec_id,
            "original_name": original_name,
            "assigned_name": zip_path.name,
            "size_bytes": len(blob),
            "received_ms": int(time.time() * 1000),
            "recording_member": recording_member,
            "annotation_member": annotation_member,
        }
        with self._log_lock:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        return record

    def list_recordings(self) -> list[dict]:
        if not self.log_path.exists():
            return []
        out = []
        with open(self.log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if (self.recordings_dir / record["recording_id"]).is_dir():
                    out.append(record)
        return out

    def recording_path(self, rec_id: str) -> Path:
        safe = Path(rec_id).name
        return self.recordings_dir / safe

    def load_recording(self, rec_id: str) -> RawRecording:
        path = self.recording_path(rec_id) / "recording.csv"
        if not path.exists():
            raise FileNotFoundError(rec_id)
        return parse_recording(path.read_text(encoding="utf-8"), device_id=rec_id)

    def annotations_text(self, rec_id: str) -> str:
        path = self.recording_path(rec_id) / "annotations.json"
        if not path.exists():
            raise FileNotFoundError(rec_id)
        return path.read_text(encoding="utf-8")

    def store_annotations(self, rec_id: str, text: str) -> None:
        if not self.recording_path(rec_id).is_dir():
            raise FileNotFoundError(rec_id)
        parse_annotations(text, self.class_set)  # whole-document validation
        atomic_write_text(self.recording_path(rec_id) / "annotations.json", text)


def _etag(text: str) -> str:
    import hashlib

    return '"' + hashlib.sha256(text.encode("utf-8")).hexdigest()[:16] + '"'


def create_app(
    store_dir,
    class_set=DEFAULT_CLASS_SET,
    max_trace_points: int = MAX_TRACE_POINTS,
    ui_dir=None,
) -> FastAPI:
    app = FastAPI(title="harlstm upload service")
    store = UploadStore(store_dir, class_set)
    app.state.store = store

    @app.post("/upload")
    async def upload(file: UploadFile):
        blob = await file.read()
        try:
            record = store.accept_upload(file.filename or "upload.zip", blob)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return JSONResponse(record, status_code=201)

    @app.get("/recordings")
    def recordings():
        return store.list_recordings()

    @app.get("/recordings/{rec_id}/trace")
    def trace(
        rec_id: str,
        max_points: int = max_trace_points,
        t0_ms: int | None = None,
        t1_ms: int | None = None,
    ):
        """Downsampled series; pass t0_ms/t1_ms to refetch a zoomed range
        at higher effective resolution."""
        try:
            rec = store.load_recording(rec_id)
        except FileNotFoundError:
            raise HTTPException(status_code=404, detail=f"no recording {rec_id}")
        max_points = max(2, min(max_points, max_trace_points))
        t_all, v_all = rec.t_ms, rec.values
        if t0_ms is not None or t1_ms is not None:
            lo = int(np.searchsorted(t_all, t0_ms, "left")) if t0_ms is not None else 0
            hi = int(np.searchsorted(t_all, t1_ms, "right")) if t1_ms is not None else len(t_all)
            if hi - lo < 2:
                raise HTTPException(status_code=400, detail="range holds fewer than 2 samples")
            t_all, v_all = t_all[lo:hi], v_all[lo:hi]
        t, v = downsample_minmax(t_all, v_all, max_points)
        spans = json.loads(store.annotations_text(rec_id)).get("spans", [])
        return {
            "recording_id": rec_id,
            "samples": len(rec),
            "rate_hz": rec.nominal_rate_hz,
            "t_ms": t.tolist(),
            "x": v[:, 0].tolist(),
            "y": v[:, 1].tolist(),
            "z": v[:, 2].tolist(),
            "spans": spans,
            "t_first_ms": int(rec.t_ms[0]),
            "t_last_ms": int(rec.t_ms[-1]),
            "view_t0_ms": int(t_all[0]),
            "view_t1_ms": int(t_all[-1]),
        }

    @app.get("/recordings/{rec_id}/annotations")
    def get_annotations(rec_id: str):
        try:
            text = store.annotations_text(rec_id)
        except FileNotFoundError:
            raise HTTPException(status_code=404, detail=f"no recording {rec_id}")
        return Response(
            content=text, media_type="application/json", headers={"ETag": _etag(text)}
        )

    @app.put("/recordings/{rec_id}/annotations")
    async def put_annotations(rec_id: str, request: Request):
        body = await request.body()
        text = body.decode("utf-8")
        try:
            store.store_annotations(rec_id, text)
        except FileNotFoundError:
            raise HTTPException(status_code=404, detail=f"no recording {rec_id}")
        except PipelineError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return Response(status_code=204, headers={"ETag": _etag(text)})

    @app.get("/classes")
    def classes():
        return {"classes": list(store.class_set)}

    ui_dir = ui_dir or os.environ.get(UI_ENV)
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
