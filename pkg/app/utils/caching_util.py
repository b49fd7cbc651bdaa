import glob
import hashlib
import json
import os
import re
from datetime import datetime, timedelta

from app.config import config

STAMP_FORMAT = "%Y%m%d"
_UNSAFE = re.compile(r"[^A-Za-z0-9_.-]")
MAX_KEY_LENGTH = 96


def normalize_key(key: str) -> str:
    """File-safe cache key; long keys keep a readable head plus a digest of the whole."""
    safe = _UNSAFE.sub("-", key)
    if len(safe) <= MAX_KEY_LENGTH:
        return safe
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
    return f"{safe[:MAX_KEY_LENGTH - 17]}-{digest}"


class CachingUtil:
    """Date-stamped JSON/text cache of oracle results under CACHE_DIR."""

    def __init__(self, cache_dir=None, expiry_days=None):
        self.cache_dir = cache_dir or config.CACHE_DIR
        self.expiry_days = expiry_days or config.CACHE_EXPIRY_DAYS
        os.makedirs(self.cache_dir, exist_ok=True)

    def _path(self, key: str, extension: str, stamp: str) -> str:
        return os.path.join(self.cache_dir, f"{key}_{stamp}.{extension}")

    def _entries(self, key: str, extension: str):
        """(path, stamp date or None) for every file stored under ``key``, newest first."""
        pattern = os.path.join(self.cache_dir, f"{glob.escape(key)}_*.{extension}")
        for path in sorted(glob.glob(pattern), reverse=True):
            stamp = os.path.basename(path)[len(key) + 1 : -(len(extension) + 1)]
            try:
                yield path, datetime.strptime(stamp, STAMP_FORMAT)
            except ValueError:
                yield path, None

    def _fresh(self, stamp) -> bool:
        return stamp is not None and datetime.now() - stamp < timedelta(days=self.expiry_days)

    def get(self, key, extension="json"):
        """Newest unexpired entry for ``key``; stale or unreadable entries are removed."""
        key = normalize_key(key)
        for path, stamp in self._entries(key, extension):
            if not self._fresh(stamp):
                os.remove(path)
                continue
            with open(path, "r", encoding="utf-8") as f:
                if extension == "json":
                    return json.load(f)
                return f.read()
        return None

    def set(self, key, extension, data):
        """Store ``data`` under today's stamp and return the file path."""
        path = self._path(normalize_key(key), extension, datetime.now().strftime(STAMP_FORMAT))
        with open(path, "w", encoding="utf-8") as f:
            if extension == "json":
                json.dump(data, f, ensure_ascii=False, indent=4, sort_keys=True)
            else:
                f.write(data)
        return path

    def purge(self) -> int:
        """Delete every expired entry in the cache directory; returns the count."""
        removed = 0
        for path in glob.glob(os.path.join(self.cache_dir, "*_*.*")):
            stamp = os.path.splitext(os.path.basename(path))[0].rsplit("_", 1)[-1]
            try:
                fresh = self._fresh(datetime.strptime(stamp, STAMP_FORMAT))
            except ValueError:
                fresh = False
            if not fresh:
                os.remove(path)
                removed += 1
        return removed
