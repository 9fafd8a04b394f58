"""Content-addressed blob store.

Stands in for a distributed content network: blobs are addressed by the
lowercase-hex SHA-256 of their bytes, identical content deduplicates, and a
fetched blob is always bit-identical to what was stored.  Optionally persists
to disk as ``<root>/<first-2-hex>/<full-64-hex>`` so addresses survive process
restarts.
"""

from __future__ import annotations

import hashlib
import os
import threading
from pathlib import Path


class StoreError(Exception):
    pass


class EmptyBlob(StoreError):
    """Raised when an empty byte string is offered for storage."""


class NotFound(StoreError):
    """Raised when no blob exists at the requested address."""


def content_address(blob: bytes) -> str:
    return hashlib.sha256(blob).hexdigest()


class BlobStore:
    """In-memory store with optional on-disk persistence.

    Concurrent reads are safe; writes are serialized by an internal lock and
    are atomic (a reader never observes a partial blob).
    """

    def __init__(self, root: str | Path | None = None):
        self._blobs: dict[str, bytes] = {}
        self._lock = threading.Lock()
        self.root = Path(root) if root is not None else None
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def __len__(self) -> int:
        return len(self._blobs)

    def __contains__(self, addr: str) -> bool:
        return addr in self._blobs or self._disk_path_if_present(addr) is not None

    def put(self, blob: bytes) -> str:
        """Store `blob` and return its content address (idempotent)."""
        if not blob:
            raise EmptyBlob("refusing to store an empty blob")
        addr = content_address(blob)
        with self._lock:
            if addr not in self._blobs:
                self._blobs[addr] = bytes(blob)
                if self.root is not None:
                    self._persist(addr, blob)
        return addr

    def get(self, addr: str) -> bytes:
        """Return the exact bytes stored at `addr`."""
        blob = self._blobs.get(addr)
        if blob is None:
            path = self._disk_path_if_present(addr)
            if path is not None:
                blob = path.read_bytes()
                with self._lock:
                    self._blobs.setdefault(addr, blob)
        if blob is None:
            raise NotFound(addr)
        return blob

    def _path(self, addr: str) -> Path:
        assert self.root is not None
        return self.root / addr[:2] / addr

    def _disk_path_if_present(self, addr: str) -> Path | None:
        if self.root is None:
            return None
        path = self._path(addr)
        return path if path.is_file() else None

    def _persist(self, addr: str, blob: bytes) -> None:
        path = self._path(addr)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(addr + ".tmp")
        tmp.write_bytes(blob)
        os.replace(tmp, path)  # atomic on POSIX
