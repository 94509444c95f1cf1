"""Model checkpoint file format.

Layout: one magic line, a JSON metadata header (architecture, dimensions,
vocabulary, seed, format version, parameter manifest), a BINARY marker line,
then every parameter tensor as little-endian float64 in header order.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .autograd import Tensor
from .vocab import Vocabulary

MAGIC = b"treelm-checkpoint 1\n"
BINARY_MARKER = b"BINARY\n"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    architecture: str  # "lstm-lm" | "action-lstm" | "rnng"
    config: dict
    vocab: Vocabulary
    nt_labels: tuple[str, ...]
    seed: int
    params: dict[str, np.ndarray]
    file_hash: str | None = None

    @property
    def vocab_hash(self) -> str:
        return hash_vocab(self.vocab)


def hash_vocab(vocab: Vocabulary) -> str:
    blob = json.dumps(vocab.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(
    path,
    architecture: str,
    config: dict,
    vocab: Vocabulary,
    nt_labels,
    seed: int,
    named_params: list[tuple[str, Tensor]],
):
    header = {
        "format_version": FORMAT_VERSION,
        "architecture": architecture,
        "config": config,
        "vocab": vocab.to_dict(),
        "vocab_hash": hash_vocab(vocab),
        "nt_labels": list(nt_labels),
        "seed": seed,
        "params": [{"name": name, "shape": list(t.values.shape)} for name, t in named_params],
    }
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(json.dumps(header, sort_keys=True).encode())
        f.write(b"\n")
        f.write(BINARY_MARKER)
        for _, t in named_params:
            f.write(np.ascontiguousarray(t.values, dtype="<f8").tobytes())
    os.replace(tmp, path)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as f:
        blob = f.read()
    if not blob.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a treelm checkpoint (bad magic)")
    rest = blob[len(MAGIC):]
    nl = rest.index(b"\n")
    header = json.loads(rest[:nl])
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {header.get('format_version')}")
    body = rest[nl + 1:]
    if not body.startswith(BINARY_MARKER):
        raise CheckpointError(f"{path}: missing binary marker")
    raw = body[len(BINARY_MARKER):]
    params: dict[str, np.ndarray] = {}
    offset = 0
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        nbytes = n * 8
        if offset + nbytes > len(raw):
            raise CheckpointError(f"{path}: truncated parameter {entry['name']!r}")
        arr = np.frombuffer(raw[offset:offset + nbytes], dtype="<f8").reshape(shape)
        params[entry["name"]] = np.array(arr, dtype=np.float64)
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes after parameters")
    return Checkpoint(
        architecture=header["architecture"],
        config=header["config"],
        vocab=Vocabulary.from_dict(header["vocab"]),
        nt_labels=tuple(header["nt_labels"]),
        seed=int(header["seed"]),
        params=params,
        file_hash=hashlib.sha256(blob).hexdigest(),
    )
