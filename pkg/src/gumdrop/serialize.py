"""Deterministic, versioned binary container for trained models.

Layout::

    MAGIC (8 bytes) | format version (u32 LE) | header length (u64 LE)
    | header (UTF-8 JSON, sorted keys) | array blobs

The header names the payload kind and the schema fingerprint, and holds
the payload tree with numpy arrays replaced by references into the blob
section. Identical payloads always produce identical bytes.
"""

import json
import struct

import numpy as np

from .errors import ModelVersionError

MAGIC = b"GUMDROP\x00"
FORMAT_VERSION = 1


def _pack(obj, blobs):
    if isinstance(obj, np.ndarray):
        arr = np.ascontiguousarray(obj)
        if arr.dtype.byteorder == ">":
            arr = arr.astype(arr.dtype.newbyteorder("<"))
        blobs.append(arr.tobytes())
        return {"__array__": len(blobs) - 1, "dtype": arr.dtype.str, "shape": list(arr.shape)}
    if isinstance(obj, dict):
        return {str(k): _pack(obj[k], blobs) for k in sorted(obj, key=str)}
    if isinstance(obj, (list, tuple)):
        return [_pack(v, blobs) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _unpack(obj, blobs):
    if isinstance(obj, dict):
        if "__array__" in obj and set(obj) == {"__array__", "dtype", "shape"}:
            raw = blobs[obj["__array__"]]
            return np.frombuffer(raw, dtype=np.dtype(obj["dtype"])).reshape(obj["shape"]).copy()
        return {k: _unpack(v, blobs) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unpack(v, blobs) for v in obj]
    return obj


def dumps(payload, kind, fingerprint=""):
    blobs = []
    tree = _pack(payload, blobs)
    header = {"format": FORMAT_VERSION, "kind": kind, "fingerprint": fingerprint,
              "payload": tree, "blob_sizes": [len(b) for b in blobs]}
    head = json.dumps(header, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")).encode("utf-8")
    return b"".join([MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<Q", len(head)),
                     head] + blobs)


def read_header(data):
    if data[:8] != MAGIC:
        raise ModelVersionError("not a model file (bad magic)")
    (version,) = struct.unpack("<I", data[8:12])
    if version != FORMAT_VERSION:
        raise ModelVersionError("model format version %d, this build reads %d"
                                % (version, FORMAT_VERSION))
    (hlen,) = struct.unpack("<Q", data[12:20])
    header = json.loads(data[20:20 + hlen].decode("utf-8"))
    if header.get("format") != FORMAT_VERSION:
        raise ModelVersionError("header format version mismatch")
    return header, 20 + hlen


def loads(data, expect_kind=None):
    """Return (kind, fingerprint, payload)."""
    header, pos = read_header(data)
    if expect_kind is not None and header["kind"] != expect_kind:
        raise ModelVersionError("expected a %s model, found %s" % (expect_kind, header["kind"]))
    blobs = []
    for size in header["blob_sizes"]:
        blobs.append(data[pos:pos + size])
        pos += size
    return header["kind"], header["fingerprint"], _unpack(header["payload"], blobs)


def save(path, payload, kind, fingerprint=""):
    with open(path, "wb") as f:
        f.write(dumps(payload, kind, fingerprint))


def load(path, expect_kind=None):
    with open(path, "rb") as f:
        return loads(f.read(), expect_kind)
