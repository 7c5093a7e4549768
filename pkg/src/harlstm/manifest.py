"""Run manifests and atomic file writes.

Every CLI command records its parameters, seeds and input digests in a
manifest JSON so a run can be reproduced exactly. All outputs go through
write-to-temp-then-rename so failures never leave partial files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, command: str, params: dict, inputs: list, outputs: list) -> dict:
    """Write a deterministic run manifest; returns the manifest dict.

    ``inputs`` are existing files (digested); ``outputs`` are paths the
    command produced. No wall-clock fields so identical runs yield identical
    manifests.
    """
    manifest = {
        "command": command,
        "params": params,
        "inputs": [
            {"path": str(p), "sha256": sha256_file(p)} for p in inputs
        ],
        "outputs": [str(p) for p in outputs],
    }
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
