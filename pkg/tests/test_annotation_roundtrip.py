"""Annotation round-trip through the service, mirroring the UI editing flow.

Covers the secondary acceptance criterion: load a fixture recording, apply
snapped head/tail trims and confirm, save, reload; the served document must
equal the edited state field for field, and segment extraction on that
document must land exactly on the snapped handle timestamps.
"""

import io
import json
import zipfile

import pytest
from fastapi.testclient import TestClient

from harlstm.cli import run_ingest
from harlstm.ingest import parse_recording, write_annotations, write_recording
from harlstm.service import create_app
from harlstm.synth import make_recording


def snap_to_sample(t_ms: int, origin_ms: int, step_ms: int, last_ms: int) -> int:
    """The UI's handle snapping rule (frontend/src/model.ts)."""
    clamped = min(max(t_ms, origin_ms), last_ms)
    return origin_ms + round((clamped - origin_ms) / step_ms) * step_ms


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "store")
    with TestClient(app) as c:
        yield c


def test_ui_edit_save_reload_then_ingest(client, tmp_path):
    rec, spans = make_recording(seed=901, bites=6, duration_s=147.0, whole_session=True)
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("recording.csv", write_recording(rec))
        zf.writestr("annotations.json", write_annotations(spans))
    rec_id = client.post(
        "/upload", files={"file": ("pizza.zip", buf.getvalue(), "application/zip")}
    ).json()["recording_id"]

    # the UI loads the trace (for the sample grid) and the annotations
    trace = client.get(f"/recordings/{rec_id}/trace").json()
    step_ms = round(1000 / trace["rate_hz"])
    origin, last = trace["t_first_ms"], trace["t_last_ms"]
    doc = client.get(f"/recordings/{rec_id}/annotations").json()
    assert len(doc["spans"]) == 1
    span = doc["spans"][0]

    # drag: head forward ~2.3 s, tail back ~1.7 s; both snap to the grid
    head_target = snap_to_sample(span["start_ms"] + 2333, origin, step_ms, last)
    tail_target = snap_to_sample(span["stop_ms"] - 1719, origin, step_ms, last)
    edited = {
        "spans": [
            {
                "label": "eating",
                "start_ms": span["start_ms"],
                "stop_ms": span["stop_ms"],
                "trim_head_ms": head_target - span["start_ms"],
                "trim_tail_ms": span["stop_ms"] - tail_target,
                "confirmed": True,
            }
        ]
    }
    body = json.dumps(edited, indent=2)
    put = client.put(f"/recordings/{rec_id}/annotations", content=body)
    assert put.status_code == 204

    # reload: the served document equals the edited state field for field
    served = client.get(f"/recordings/{rec_id}/annotations")
    assert json.loads(served.text) == edited
    assert served.text == body

    # ingest from the served document; boundaries equal the snapped handles
    rec_csv = tmp_path / "rec.csv"
    ann_json = tmp_path / "ann.json"
    rec_csv.write_text(write_recording(rec))
    ann_json.write_text(served.text)
    out = tmp_path / "segments"
    files = run_ingest([str(rec_csv)], [str(ann_json)], [], out, ("eating", "other"))
    assert len(files) == 1
    segment = parse_recording(files[0].read_text())
    assert int(segment.t_ms[0]) == head_target
    assert int(segment.t_ms[-1]) == tail_target
    print(
        f"\n[criterion 9] annotation round-trip: PASS "
        f"served==edited, segment [{segment.t_ms[0]}, {segment.t_ms[-1]}] == snapped handles"
    )


def test_unsnapped_edit_still_round_trips(client):
    rec, spans = make_recording(seed=902, bites=3, duration_s=60.0)
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("r.csv", write_recording(rec))
        zf.writestr("a.json", write_annotations(spans))
    rec_id = client.post(
        "/upload", files={"file": ("x.zip", buf.getvalue(), "application/zip")}
    ).json()["recording_id"]
    doc = client.get(f"/recordings/{rec_id}/annotations").json()
    for span in doc["spans"]:
        span["confirmed"] = True
    body = json.dumps(doc, sort_keys=True)
    assert client.put(f"/recordings/{rec_id}/annotations", content=body).status_code == 204
    assert client.get(f"/recordings/{rec_id}/annotations").text == body
