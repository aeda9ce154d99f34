"""Single-file checkpoint format.

Field order::

    magic          4 bytes   b"QEES"
    version        uint32 LE (currently 1)
    header_length  uint32 LE
    header         UTF-8 JSON: generation, config_digest, dim,
                   adam {step_count, alpha, beta1, beta2, eps, l2_coeff},
                   counters {run_seed, table_seed, init_seed,
                             generations_sampled, episodes_evaluated}
    center         dim float64 LE
    adam_m         dim float64 LE
    adam_v         dim float64 LE

``generation`` is the number of completed generations, i.e. the index of
the next generation to run. Arrays are stored as raw bytes, so a round trip
is bit-exact.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ParameterVector
from .errors import CheckpointError
from .optimizer import AdamState

MAGIC = b"QEES"
VERSION = 1


@dataclass(frozen=True, eq=False)
class Checkpoint:
    generation: int
    center: ParameterVector
    adam: AdamState
    config_digest: str
    counters: dict = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Checkpoint):
            return NotImplemented
        return (
            self.generation == other.generation
            and self.center == other.center
            and self.adam == other.adam
            and self.config_digest == other.config_digest
            and self.counters == other.counters
        )


def to_bytes(ckpt: Checkpoint) -> bytes:
    dim = ckpt.center.dim
    header = {
        "generation": ckpt.generation,
        "config_digest": ckpt.config_digest,
        "dim": dim,
        "adam": {"step_count": ckpt.adam.step_count, **ckpt.adam.hyperparameters()},
        "counters": ckpt.counters,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", VERSION, len(blob)), blob]
    for arr in (ckpt.center.values, ckpt.adam.m, ckpt.adam.v):
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(parts)


def from_bytes(data: bytes) -> Checkpoint:
    if data[:4] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    if len(data) < 12:
        raise CheckpointError("truncated checkpoint header")
    version, hlen = struct.unpack("<II", data[4:12])
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    try:
        header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from None
    dim = int(header["dim"])
    body = data[12 + hlen :]
    if len(body) != 3 * 8 * dim:
        raise CheckpointError(f"expected {3 * 8 * dim} payload bytes, found {len(body)}")
    arrays = [np.frombuffer(body[k * 8 * dim : (k + 1) * 8 * dim], dtype="<f8").astype(np.float64) for k in range(3)]
    a = header["adam"]
    adam = AdamState(
        m=arrays[1],
        v=arrays[2],
        step_count=int(a["step_count"]),
        alpha=a["alpha"],
        beta1=a["beta1"],
        beta2=a["beta2"],
        eps=a["eps"],
        l2_coeff=a["l2_coeff"],
    )
    return Checkpoint(
        generation=int(header["generation"]),
        center=ParameterVector(arrays[0]),
        adam=adam,
        config_digest=header["config_digest"],
        counters=header.get("counters", {}),
    )


def save(ckpt: Checkpoint, path) -> Path:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(to_bytes(ckpt))
    tmp.replace(path)
    return path


def load(path) -> Checkpoint:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc.strerror}") from None
    return from_bytes(data)
