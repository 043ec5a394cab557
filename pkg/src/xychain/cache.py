"""Content-addressed on-disk cache for expensive per-point results.

Entries are small JSON files named by the SHA-256 of the canonical key.
Floats round-trip exactly through ``repr``.  Writes go through a temporary
file and ``os.replace``, so concurrent writers of one key cannot leave a torn
entry; a writer that finds an existing entry checks it holds the same value.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import __version__

log = logging.getLogger(__name__)

CACHE_ENV = "XYCHAIN_CACHE_DIR"
# bump when a numerical change alters cached values
CODE_TAG = f"xychain-{__version__}-c1"


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "xychain"


def round_sig(x: float, digits: int = 12) -> str:
    return f"{float(x):.{digits}g}"


@dataclass(frozen=True)
class CacheKey:
    kind: str
    pattern: str
    N: int
    gamma: float
    lam: float
    tag: str = CODE_TAG

    def canonical(self) -> str:
        return json.dumps(
            [self.kind, self.pattern, int(self.N), round_sig(self.gamma), round_sig(self.lam), self.tag],
            separators=(",", ":"),
        )

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


class ResultCache:
    """JSON-valued cache rooted at ``root``; ``root=None`` disables it."""

    def __init__(self, root: Path | str | None):
        self.root = Path(root) if root is not None else None
        self.hits = 0
        self.misses = 0

    def _path(self, key: CacheKey) -> Path:
        d = key.digest
        return self.root / d[:2] / f"{d}.json"

    def load(self, key: CacheKey):
        """Stored value, or ``None`` on a miss (including unreadable entries)."""
        if self.root is None:
            self.misses += 1
            return None
        path = self._path(key)
        try:
            with open(path) as fh:
                entry = json.load(fh)
            if entry["key"] != key.canonical():
                raise ValueError("key mismatch")
        except FileNotFoundError:
            self.misses += 1
            return None
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("ignoring corrupted cache entry %s: %s", path, exc)
            self.misses += 1
            return None
        self.hits += 1
        return entry["value"]

    def store(self, key: CacheKey, value) -> None:
        if self.root is None:
            return
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps({"key": key.canonical(), "value": value}, sort_keys=True)
        if path.exists():
            try:
                old = json.loads(path.read_text())
            except ValueError:
                old = None
            if old is not None and old.get("key") == key.canonical():
                if old["value"] != json.loads(payload)["value"]:
                    raise RuntimeError(f"cache entry {path} holds a different value for the same key")
                return
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    def get_or_compute(self, key: CacheKey, compute):
        val = self.load(key)
        if val is None:
            val = compute()
            self.store(key, val)
        return val

    @property
    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0
