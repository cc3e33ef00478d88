"""Versioned binary checkpoint format with a JSON sidecar.

Layout of the .bin file (all integers little-endian):

    magic   8 bytes  b"PRCHCKPT"
    version u32
    count   u32      number of named blocks
    blocks  repeated:
        name_len u16, name utf-8,
        ndim u8, dims u32 * ndim,
        data float64 little-endian, C order

The sidecar (same path with .json extension) records the block names plus
whatever metadata the caller passes: normalization scales, trigger
threshold, network sizes, seed, a config snapshot, RNG state. Together
the pair is sufficient for a bit-exact reload.
"""

import json
import os
import struct

import numpy as np

MAGIC = b"PRCHCKPT"
VERSION = 1


class CheckpointError(RuntimeError):
    pass


def sidecar_path(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root + ".json"


def save_checkpoint(path: str, arrays: dict[str, np.ndarray],
                    meta: dict | None = None) -> None:
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<II", VERSION, len(arrays))
    for name, arr in arrays.items():
        # ascontiguousarray would promote 0-d scalars to shape (1,).
        data = np.asarray(arr, dtype="<f8")
        if data.ndim > 0:
            data = np.ascontiguousarray(data)
        encoded = name.encode("utf-8")
        blob += struct.pack("<H", len(encoded))
        blob += encoded
        blob += struct.pack("<B", data.ndim)
        for dim in data.shape:
            blob += struct.pack("<I", dim)
        blob += data.tobytes()
    with open(path, "wb") as fh:
        fh.write(blob)

    sidecar = {"format_version": VERSION,
               "blocks": list(arrays.keys()),
               "meta": meta or {}}
    with open(sidecar_path(path), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path: str) -> tuple[dict[str, np.ndarray], dict]:
    if not os.path.exists(path):
        raise CheckpointError(f"checkpoint not found: {path}")
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC:
        raise CheckpointError(f"bad magic in {path}")
    version, count = struct.unpack_from("<II", blob, 8)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    offset = 16
    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset:offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<B", blob, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", blob, offset) if ndim else ()
        offset += 4 * ndim
        n_items = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(blob, dtype="<f8", count=n_items, offset=offset)
        offset += 8 * n_items
        arrays[name] = arr.reshape(shape).astype(np.float64).copy()

    meta: dict = {}
    sp = sidecar_path(path)
    if os.path.exists(sp):
        with open(sp) as fh:
            meta = json.load(fh).get("meta", {})
    return arrays, meta
