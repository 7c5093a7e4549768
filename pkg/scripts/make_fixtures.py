#!/usr/bin/env python3
"""Write demo fixtures: a 6-bite pizza-style recording pair plus a zipped
upload, ready for `harlstm ingest`, `harlstm serve`, or the annotator UI.

Usage: python scripts/make_fixtures.py [out_dir]
"""

import sys
import zipfile
from pathlib import Path

from harlstm.ingest import write_annotations, write_recording
from harlstm.synth import make_recording


def main() -> int:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
    out.mkdir(parents=True, exist_ok=True)
    rec, spans = make_recording(seed=147, bites=6, duration_s=147.0, whole_session=True)
    rec_path = out / "pizza_demo.csv"
    ann_path = out / "pizza_demo.json"
    rec_path.write_text(write_recording(rec))
    ann_path.write_text(write_annotations(spans))
    with zipfile.ZipFile(out / "pizza_demo.zip", "w") as zf:
        zf.write(rec_path, "recording.csv")
        zf.write(ann_path, "annotations.json")
    print(f"wrote {rec_path}, {ann_path}, {out / 'pizza_demo.zip'}")
    print(f"{len(rec)} samples over {(rec.t_ms[-1] - rec.t_ms[0]) / 1000:.0f} s, "
          f"{len(spans)} reported spans (unconfirmed; confirm them in the UI)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
