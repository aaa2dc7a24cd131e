"""Binary weight files.

Layout (little-endian): magic ``SHDQ``, u16 format version, u16 layer count,
then (u32 rows, u32 cols) per layer, then for each layer the row-major f64
weight matrix followed by its f64 bias vector.
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .network import QNetwork

MAGIC = b"SHDQ"
VERSION = 1


class WeightFileError(ValueError):
    pass


def dumps(net: QNetwork) -> bytes:
    parts = [MAGIC, struct.pack("<HH", VERSION, len(net.weights))]
    for w in net.weights:
        parts.append(struct.pack("<II", *w.shape))
    for w, b in zip(net.weights, net.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    return b"".join(parts)


def loads(data: bytes, n_actions: int | None = None) -> QNetwork:
    if len(data) < 8 or data[:4] != MAGIC:
        raise WeightFileError("not a weight file (bad magic)")
    version, n_layers = struct.unpack_from("<HH", data, 4)
    if version != VERSION:
        raise WeightFileError(f"unsupported format version {version}")
    off = 8
    if len(data) < off + 8 * n_layers:
        raise WeightFileError("truncated layer header")
    shapes = [struct.unpack_from("<II", data, off + 8 * i) for i in range(n_layers)]
    off += 8 * n_layers
    expected = off + sum(8 * (r * c + r) for r, c in shapes)
    if len(data) != expected:
        raise WeightFileError(f"payload is {len(data)} bytes, header implies {expected}")
    weights, biases = [], []
    for r, c in shapes:
        weights.append(np.frombuffer(data, "<f8", r * c, off).reshape(r, c).astype(np.float64))
        off += 8 * r * c
        biases.append(np.frombuffer(data, "<f8", r, off).astype(np.float64))
        off += 8 * r
    try:
        net = QNetwork(weights, biases)
    except ValueError as exc:
        raise WeightFileError(str(exc)) from None
    if n_actions is not None and net.n_actions != n_actions:
        raise WeightFileError(f"network has {net.n_actions} outputs, expected {n_actions}")
    return net


def save_weights(net: QNetwork, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(dumps(net))
    os.replace(tmp, path)


def load_weights(path, n_actions: int | None = None) -> QNetwork:
    with open(path, "rb") as fh:
        return loads(fh.read(), n_actions)
