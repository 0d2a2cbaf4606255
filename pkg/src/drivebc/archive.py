"""Deterministic binary container for tensors, plus the window archive.

Layout: an 8-byte magic, an 8-byte little-endian header length, a JSON
header, then raw tensor bytes. The header records a format version, free-form
metadata, and for each tensor its name, dtype, shape and offset into the data
section. Tensors are written in sorted-name order, C-contiguous,
little-endian, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .data import NUM_FEATURES, CameraView, WindowSample
from .features import NormalizerStats

MAGIC = b"DBTC0001"
FORMAT_VERSION = 1
_DTYPES = {"<f8": np.dtype("<f8"), "<f4": np.dtype("<f4"), "<i8": np.dtype("<i8")}


class ContainerError(ValueError):
    pass


def write_container(path, meta: dict, tensors: dict[str, np.ndarray]) -> None:
    """Write metadata and named tensors; byte-deterministic for equal inputs."""
    entries = []
    blobs = []
    offset = 0
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name])
        dt = arr.dtype.newbyteorder("<")
        if dt.str not in _DTYPES:
            raise ContainerError(f"unsupported dtype {arr.dtype} for tensor {name!r}")
        data = arr.astype(dt, copy=False).tobytes()
        entries.append({"name": name, "dtype": dt.str, "shape": list(arr.shape),
                        "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)
    header = json.dumps({"version": FORMAT_VERSION, "meta": meta, "tensors": entries},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def read_container(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read back (meta, tensors) written by write_container."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ContainerError(f"{path}: not a drivebc container (bad magic)")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("version") != FORMAT_VERSION:
            raise ContainerError(f"{path}: unsupported container version "
                                 f"{header.get('version')!r}")
        data = fh.read()
    tensors = {}
    for entry in header["tensors"]:
        dt = _DTYPES[entry["dtype"]]
        start, n = entry["offset"], entry["nbytes"]
        arr = np.frombuffer(data[start:start + n], dtype=dt)
        tensors[entry["name"]] = arr.reshape(entry["shape"]).copy()
    return header["meta"], tensors


# ---------------------------------------------------------------------------
# Window batches: stacked samples plus provenance


@dataclass(eq=False)
class WindowBatch:
    """Stacked WindowSamples ready for training and evaluation."""

    features: np.ndarray        # (N, T, 12)
    target: np.ndarray          # (N, K, 2) smoothed
    raw_target: np.ndarray      # (N, K, 2) unsmoothed, diagnostics
    last_accel: np.ndarray      # (N, 2) smoothed accel at the last history frame
    segment_ids: list[str]      # id table for segment_index
    segment_index: np.ndarray   # (N,) int64
    start_index: np.ndarray     # (N,) int64
    embeddings: dict[str, np.ndarray] = field(default_factory=dict)  # view -> (N, T, D)
    normalizer: Optional[NormalizerStats] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def embedding_dim(self) -> Optional[int]:
        for arr in self.embeddings.values():
            return int(arr.shape[2])
        return None

    def window_segment_ids(self) -> set[str]:
        used = np.unique(self.segment_index)
        return {self.segment_ids[i] for i in used}

    def select(self, idx: np.ndarray) -> "WindowBatch":
        return WindowBatch(
            features=self.features[idx], target=self.target[idx],
            raw_target=self.raw_target[idx], last_accel=self.last_accel[idx],
            segment_ids=self.segment_ids, segment_index=self.segment_index[idx],
            start_index=self.start_index[idx],
            embeddings={v: a[idx] for v, a in self.embeddings.items()},
            normalizer=self.normalizer, meta=self.meta)


def stack_windows(samples: Sequence[WindowSample],
                  normalizer: Optional[NormalizerStats] = None,
                  meta: Optional[dict] = None) -> WindowBatch:
    """Stack per-sample arrays into one batch, preserving sample order."""
    if not samples:
        raise ValueError("cannot stack an empty window list")
    seg_ids: list[str] = []
    seg_lookup: dict[str, int] = {}
    seg_index = np.empty(len(samples), dtype=np.int64)
    for i, s in enumerate(samples):
        if s.segment_id not in seg_lookup:
            seg_lookup[s.segment_id] = len(seg_ids)
            seg_ids.append(s.segment_id)
        seg_index[i] = seg_lookup[s.segment_id]
    views = ()
    if samples[0].embeddings is not None:
        views = tuple(v for v in CameraView if v in samples[0].embeddings)
    embeddings = {v.value: np.stack([s.embeddings[v] for s in samples]) for v in views}
    return WindowBatch(
        features=np.stack([s.features for s in samples]),
        target=np.stack([s.target for s in samples]),
        raw_target=np.stack([s.raw_target for s in samples]),
        last_accel=np.stack([s.last_accel for s in samples]),
        segment_ids=seg_ids,
        segment_index=seg_index,
        start_index=np.array([s.start_index for s in samples], dtype=np.int64),
        embeddings=embeddings,
        normalizer=normalizer,
        meta=dict(meta or {}),
    )


def save_windows(batch: WindowBatch, path) -> None:
    """Persist a WindowBatch as a container file."""
    meta = {
        "kind": "windows",
        "segment_ids": batch.segment_ids,
        "views": sorted(batch.embeddings),
        "normalizer": None if batch.normalizer is None else {
            "mean": list(batch.normalizer.mean), "std": list(batch.normalizer.std)},
        "pipeline": batch.meta,
    }
    tensors = {
        "features": batch.features,
        "target": batch.target,
        "raw_target": batch.raw_target,
        "last_accel": batch.last_accel,
        "segment_index": batch.segment_index,
        "start_index": batch.start_index,
    }
    for view, arr in batch.embeddings.items():
        tensors[f"emb_{view}"] = arr
    write_container(path, meta, tensors)


def load_windows(path) -> WindowBatch:
    """Load a WindowBatch written by save_windows."""
    meta, tensors = read_container(path)
    if meta.get("kind") != "windows":
        raise ContainerError(f"{path}: not a window archive")
    norm = None
    if meta.get("normalizer"):
        norm = NormalizerStats(mean=np.array(meta["normalizer"]["mean"]),
                               std=np.array(meta["normalizer"]["std"]))
    embeddings = {name[len("emb_"):]: arr for name, arr in tensors.items()
                  if name.startswith("emb_")}
    batch = WindowBatch(
        features=tensors["features"], target=tensors["target"],
        raw_target=tensors["raw_target"], last_accel=tensors["last_accel"],
        segment_ids=list(meta["segment_ids"]),
        segment_index=tensors["segment_index"],
        start_index=tensors["start_index"],
        embeddings=embeddings, normalizer=norm, meta=dict(meta.get("pipeline", {})))
    if batch.features.shape[2] != NUM_FEATURES:
        raise ContainerError(f"{path}: expected {NUM_FEATURES} features, "
                             f"got {batch.features.shape[2]}")
    return batch
