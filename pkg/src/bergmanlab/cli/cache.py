"""On-disk cache for norm tables and Gram matrices.

One file per key, named by the SHA-256 of the canonical key text.  Layout::

    bytes 0..3    magic b"BGLB"
    bytes 4..5    format version (uint16, little endian)
    bytes 6..7    payload kind (uint16)
    bytes 8..15   payload length in bytes (uint64)
    bytes 16..47  SHA-256 of the payload
    bytes 48..    payload: one array in .npy format

Writes take an exclusive ``flock`` and reads a shared one.  An entry is
written once; a file that fails its checksum or carries another format version
reads as a miss and is overwritten by the next put.
"""

from __future__ import annotations

import fcntl
import hashlib
import io
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"BGLB"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHHQ")
DIGEST_SIZE = 32
KINDS = {"norms": 1, "gram": 2}


@dataclass(frozen=True)
class CacheKey:
    """Identity of a cached table."""

    kind: str
    domain: str
    weight: str
    N: int
    order: int | None
    extra: str = ""
    version: int = FORMAT_VERSION

    def text(self) -> str:
        return (f"v={self.version}|kind={self.kind}|domain={self.domain}|weight={self.weight}"
                f"|N={self.N}|order={self.order}|{self.extra}")

    def digest(self) -> str:
        return hashlib.sha256(self.text().encode()).hexdigest()


def default_cache_dir() -> Path:
    env = os.environ.get("BERGMANLAB_CACHE")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "bergmanlab"


def _encode(array: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.save(buf, np.ascontiguousarray(array), allow_pickle=False)
    return buf.getvalue()


class Cache:
    """Content-checked array store under ``root``."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def path(self, key: CacheKey) -> Path:
        return self.root / f"{key.digest()}.bglb"

    def _read(self, path: Path, key: CacheKey) -> np.ndarray | None:
        try:
            with open(path, "rb") as fh:
                fcntl.flock(fh, fcntl.LOCK_SH)
                try:
                    blob = fh.read()
                finally:
                    fcntl.flock(fh, fcntl.LOCK_UN)
        except FileNotFoundError:
            return None
        if len(blob) < HEADER.size + DIGEST_SIZE:
            return None
        magic, version, kind, length = HEADER.unpack_from(blob)
        if magic != MAGIC or version != key.version or kind != KINDS[key.kind]:
            return None
        digest = blob[HEADER.size:HEADER.size + DIGEST_SIZE]
        payload = blob[HEADER.size + DIGEST_SIZE:]
        if len(payload) != length or hashlib.sha256(payload).digest() != digest:
            return None
        try:
            return np.load(io.BytesIO(payload), allow_pickle=False)
        except ValueError:
            return None

    def get(self, key: CacheKey) -> np.ndarray | None:
        """The stored array, or ``None`` on a miss (absent, corrupt or stale)."""
        return self._read(self.path(key), key)

    def put(self, key: CacheKey, array: np.ndarray) -> bool:
        """Store ``array`` unless a valid entry exists; returns whether it wrote."""
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.path(key)
        payload = _encode(array)
        blob = (HEADER.pack(MAGIC, key.version, KINDS[key.kind], len(payload))
                + hashlib.sha256(payload).digest() + payload)
        with open(path, "a+b") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                if self._valid_locked(fh, key):
                    return False
                fh.seek(0)
                fh.truncate()
                fh.write(blob)
                fh.flush()
                os.fsync(fh.fileno())
                return True
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def _valid_locked(self, fh, key: CacheKey) -> bool:
        fh.seek(0)
        blob = fh.read()
        if len(blob) < HEADER.size + DIGEST_SIZE:
            return False
        magic, version, kind, length = HEADER.unpack_from(blob)
        payload = blob[HEADER.size + DIGEST_SIZE:]
        return (magic == MAGIC and version == key.version and kind == KINDS[key.kind]
                and len(payload) == length
                and hashlib.sha256(payload).digest() == blob[HEADER.size:HEADER.size + DIGEST_SIZE])

    def entries(self) -> list[Path]:
        if not self.root.is_dir():
            return []
        return sorted(self.root.glob("*.bglb"))

    def stat(self) -> dict:
        files = self.entries()
        kinds = {name: 0 for name in KINDS}
        by_code = {v: k for k, v in KINDS.items()}
        corrupt = 0
        for f in files:
            with open(f, "rb") as fh:
                head = fh.read(HEADER.size)
            if len(head) < HEADER.size or head[:4] != MAGIC:
                corrupt += 1
                continue
            _, _, kind, _ = HEADER.unpack(head)
            if kind in by_code:
                kinds[by_code[kind]] += 1
            else:
                corrupt += 1
        return {"root": str(self.root), "entries": len(files),
                "bytes": sum(f.stat().st_size for f in files), "by_kind": kinds,
                "unreadable": corrupt, "format_version": FORMAT_VERSION}

    def clear(self) -> int:
        files = self.entries()
        for f in files:
            f.unlink(missing_ok=True)
        return len(files)
