"""File and seeding utilities: atomic writes, stable hashing, derived RNGs."""

import hashlib
import os
import tempfile

import numpy as np


def atomic_write_bytes(path: str, payload: bytes) -> None:
    """Write *payload* to *path* through a temp file and ``os.replace``.

    Readers either see the previous file or the complete new one.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except Exception:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def stable_hash(text: str) -> int:
    """Process-independent hash (``hash()`` is salted per interpreter)."""
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


def derived_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator per (seed, keys) so examples can be built in any order."""
    return np.random.default_rng([seed, *keys])
