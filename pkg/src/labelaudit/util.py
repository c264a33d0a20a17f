"""Small shared helpers: seed derivation and atomic file output."""
from __future__ import annotations

import hashlib
import os
import tempfile

_MASK64 = (1 << 64) - 1


def derive_seed(*parts: object) -> int:
    """Derive a 64-bit seed from arbitrary parts, stably across processes.

    Python's builtin ``hash`` is salted per interpreter, so this uses
    blake2b over the repr of the parts instead.
    """
    key = "\x1f".join(repr(p) for p in parts).encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "big") & _MASK64


def atomic_write_text(path: str | os.PathLike[str], text: str) -> None:
    """Write text to path via a temp file and rename, so readers never see
    a partial file and failures leave no output behind."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
