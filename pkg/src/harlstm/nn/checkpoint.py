"""Versioned model checkpoints with integrity checking.

A checkpoint is a single JSON document: header fields (format version,
dims, class map, window size, dtype, optimizer flag), every tensor as a
base64 string of little-endian IEEE-754 bytes in the model's precision, and
a sha256 over the canonical body. Round-trips are bit-exact.
"""

from __future__ import annotations

import base64
import hashlib
import json

import numpy as np

from ..errors import CorruptChecksumError, VersionMismatchError
from ..manifest import atomic_write_text
from ..windows import ClassMap
from .optim import AdamState
from .params import ModelDims, ModelParams, _rebuild

FORMAT_NAME = "harlstm-checkpoint"
FORMAT_VERSION = 1

_DTYPES = {"float32": "<f4", "float64": "<f8"}


def _encode(arr: np.ndarray, wire_dtype: str) -> dict:
    data = np.ascontiguousarray(arr, dtype=_DTYPES[wire_dtype])
    return {
        "shape": list(arr.shape),
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def _decode(entry: dict, wire_dtype: str) -> np.ndarray:
    raw = base64.b64decode(entry["data"])
    arr = np.frombuffer(raw, dtype=_DTYPES[wire_dtype])
    return arr.reshape(entry["shape"]).astype(np.dtype(wire_dtype))


def _canonical(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def checkpoint_document(
    params: ModelParams,
    class_map: ClassMap | None = None,
    window_size: int | None = None,
    optimizer_state: AdamState | None = None,
) -> dict:
    dtype_name = str(params.dtype)
    if dtype_name not in _DTYPES:
        raise ValueError(f"unsupported parameter dtype {dtype_name}")
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "dtype": dtype_name,
        "dims": {
            "in_features": params.dims.in_features,
            "hidden": params.dims.hidden,
            "classes": params.dims.classes,
        },
        "window_size": window_size,
        "class_map": (
            None
            if class_map is None
            else {"names": list(class_map.names), "positive_index": class_map.positive_index}
        ),
        "has_optimizer_state": optimizer_state is not None,
        "tensors": {n: _encode(a, dtype_name) for n, a in params.named_tensors()},
    }
    if optimizer_state is not None:
        doc["optimizer"] = {
            "t": optimizer_state.t,
            "m": {n: _encode(a, dtype_name) for n, a in optimizer_state.m.items()},
            "v": {n: _encode(a, dtype_name) for n, a in optimizer_state.v.items()},
        }
    doc["sha256"] = hashlib.sha256(_canonical(doc)).hexdigest()
    return doc


def serialize_checkpoint(params, class_map=None, window_size=None, optimizer_state=None) -> str:
    doc = checkpoint_document(params, class_map, window_size, optimizer_state)
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save_checkpoint(params, path, class_map=None, window_size=None, optimizer_state=None) -> None:
    atomic_write_text(
        path, serialize_checkpoint(params, class_map, window_size, optimizer_state)
    )


def deserialize_checkpoint(text: str) -> dict:
    """Parse and verify a checkpoint; returns a dict of decoded fields.

    Keys: ``params``, ``class_map``, ``window_size``, ``optimizer_state``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptChecksumError(f"unreadable checkpoint: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise CorruptChecksumError("not a model checkpoint")
    if doc.get("version") != FORMAT_VERSION:
        raise VersionMismatchError(
            f"checkpoint version {doc.get('version')}, supported {FORMAT_VERSION}"
        )
    expected = doc.pop("sha256", None)
    if expected != hashlib.sha256(_canonical(doc)).hexdigest():
        raise CorruptChecksumError("checkpoint checksum mismatch")
    dtype_name = doc["dtype"]
    if dtype_name not in _DTYPES:
        raise CorruptChecksumError(f"unknown dtype {dtype_name}")
    dims = ModelDims(**doc["dims"])
    np_dtype = np.dtype(dtype_name)
    tensors = {
        n: _decode(entry, dtype_name).astype(np_dtype)
        for n, entry in doc["tensors"].items()
    }
    params = _rebuild(dims, tensors)
    class_map = None
    if doc.get("class_map"):
        class_map = ClassMap(
            names=tuple(doc["class_map"]["names"]),
            positive_index=doc["class_map"]["positive_index"],
        )
    optimizer_state = None
    if doc.get("has_optimizer_state"):
        opt = doc["optimizer"]
        optimizer_state = AdamState(
            t=opt["t"],
            m={n: _decode(e, dtype_name).astype(np_dtype) for n, e in opt["m"].items()},
            v={n: _decode(e, dtype_name).astype(np_dtype) for n, e in opt["v"].items()},
        )
    return {
        "params": params,
        "class_map": class_map,
        "window_size": doc.get("window_size"),
        "optimizer_state": optimizer_state,
    }


def load_checkpoint(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize_checkpoint(fh.read())
