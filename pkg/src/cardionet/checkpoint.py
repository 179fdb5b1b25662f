"""Binary checkpoint serialization.

Layout, all integers little-endian:

    magic "CDNT" (4 bytes)
    format version, u32
    metadata length, u32, then that many bytes of UTF-8 JSON
    tensor count, u32
    per tensor:
        name length u16, UTF-8 name
        rank u8, extents u32 each
        raw IEEE-754 float32 data, little-endian, row-major

Metadata holds the architecture config plus epoch, train/valid loss, and
seed. JSON is written canonically (sorted keys, no whitespace) so that
save -> load -> save reproduces the file byte for byte.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .errors import CheckpointError
from .network import CardioNet, CardioNetConfig

MAGIC = b"CDNT"
VERSION = 1


@dataclass
class Checkpoint:
    config: CardioNetConfig
    params: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)  # epoch, train_loss, valid_loss, seed

    def build_model(self) -> CardioNet:
        model = CardioNet(self.config, seed=int(self.meta.get("seed", 0)))
        model.load_parameters(self.params)
        return model

    @classmethod
    def from_model(cls, model: CardioNet, meta: dict | None = None) -> "Checkpoint":
        params = {k: np.array(v, dtype=np.float32) for k, v in model.parameters().items()}
        return cls(config=model.config, params=params, meta=dict(meta or {}))


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    meta = dict(ckpt.meta)
    meta["config"] = ckpt.config.as_dict()
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(struct.pack("<I", len(ckpt.params)))
        for name, tensor in ckpt.params.items():
            name_bytes = name.encode("utf-8")
            fh.write(struct.pack("<H", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<B", tensor.ndim))
            for extent in tensor.shape:
                fh.write(struct.pack("<I", extent))
            fh.write(np.ascontiguousarray(tensor, dtype="<f4").tobytes())


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"{path}: bad magic bytes {magic!r}, not a checkpoint file")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, path, "version"))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        (meta_len,) = struct.unpack("<I", _read_exact(fh, 4, path, "metadata length"))
        try:
            meta = json.loads(_read_exact(fh, meta_len, path, "metadata").decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CheckpointError(f"{path}: corrupt metadata block: {exc}") from exc
        if "config" not in meta:
            raise CheckpointError(f"{path}: metadata lacks the architecture config")
        config = CardioNetConfig.from_dict(meta.pop("config"))

        (count,) = struct.unpack("<I", _read_exact(fh, 4, path, "tensor count"))
        params: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2, path, "tensor name length"))
            name = _read_exact(fh, name_len, path, "tensor name").decode("utf-8")
            (rank,) = struct.unpack("<B", _read_exact(fh, 1, path, f"rank of '{name}'"))
            shape = tuple(
                struct.unpack("<I", _read_exact(fh, 4, path, f"extents of '{name}'"))[0]
                for _ in range(rank))
            nbytes = 4 * int(np.prod(shape)) if shape else 4
            raw = _read_exact(fh, nbytes, path, f"tensor data for '{name}'")
            params[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
        if fh.read(1):
            raise CheckpointError(f"{path}: trailing bytes after the last tensor")
    return Checkpoint(config=config, params=params, meta=meta)


def _read_exact(fh: BinaryIO, n: int, path, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointError(f"{path}: truncated file while reading {what}")
    return data
