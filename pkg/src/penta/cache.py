"""On-disk cache for echelonized quotient tables.

The cache root comes from the PENTA_CACHE environment variable; without it
everything stays in memory.  Blobs are versioned and checksummed; writers
replace files atomically so concurrent readers never see torn data.
"""

import hashlib
import os
import pickle
import tempfile

MAGIC = b"PENTA1\n"


def cache_dir():
    root = os.environ.get("PENTA_CACHE")
    if not root:
        return None
    os.makedirs(root, exist_ok=True)
    return root


def _path(key):
    return os.path.join(cache_dir(), key + ".bin")


def save(key, obj):
    root = cache_dir()
    if root is None:
        return False
    payload = pickle.dumps(obj, protocol=4)
    digest = hashlib.sha256(payload).digest()
    fd, tmp = tempfile.mkstemp(dir=root, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(digest)
            fh.write(payload)
        os.replace(tmp, _path(key))
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return True


def load(key):
    root = cache_dir()
    if root is None:
        return None
    path = _path(key)
    if not os.path.exists(path):
        return None
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MAGIC):
        return None
    digest, payload = blob[len(MAGIC) : len(MAGIC) + 32], blob[len(MAGIC) + 32 :]
    if hashlib.sha256(payload).digest() != digest:
        return None
    return pickle.loads(payload)
