"""Model files: magic, format version, length, SHA-256 checksum, JSON payload.

Layout::

    b"DINSMODL"  8 bytes
    version      1 byte
    length       8 bytes, big-endian payload size
    checksum     32 bytes, SHA-256 of the payload
    payload      UTF-8 JSON with sorted keys
"""

from __future__ import annotations

import hashlib
import json
import struct

from .errors import BadHeader, Corrupt, ModelError, ModelMismatch, VersionUnsupported
from .network import Network

MAGIC = b"DINSMODL"
VERSION = 1
_HEAD = len(MAGIC) + 1 + 8 + 32


def model_bytes(net: Network) -> bytes:
    payload = json.dumps(net.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + bytes([VERSION]) + struct.pack(">Q", len(payload)) + hashlib.sha256(payload).digest() + payload


def model_from_bytes(blob: bytes) -> Network:
    if len(blob) < len(MAGIC) + 1 or blob[: len(MAGIC)] != MAGIC:
        raise BadHeader("not a model file (bad magic)")
    version = blob[len(MAGIC)]
    if version != VERSION:
        raise VersionUnsupported(f"model format version {version} is not supported (expected {VERSION})")
    if len(blob) < _HEAD:
        raise Corrupt("model header is truncated")
    (length,) = struct.unpack(">Q", blob[len(MAGIC) + 1: len(MAGIC) + 9])
    digest = blob[len(MAGIC) + 9: _HEAD]
    payload = blob[_HEAD:]
    if len(payload) != length:
        raise Corrupt(f"payload is {len(payload)} bytes, header says {length}")
    if hashlib.sha256(payload).digest() != digest:
        raise Corrupt("checksum mismatch")
    try:
        return Network.from_dict(json.loads(payload.decode("utf-8")))
    except (ValueError, KeyError, TypeError) as exc:
        raise Corrupt(f"undecodable payload: {exc}") from exc


def save_model(net: Network, path) -> bytes:
    blob = model_bytes(net)
    with open(path, "wb") as fh:
        fh.write(blob)
    return blob


def load_model(path) -> Network:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ModelError(f"cannot read model {path}: {exc}") from exc
    return model_from_bytes(blob)


def check_compatible(net: Network, config: dict):
    """Raise ``ModelMismatch`` when the model was built with a different front end."""
    from .config import frontend_hash

    want = frontend_hash(config)
    if net.fingerprint != want:
        raise ModelMismatch(f"model front-end hash {net.fingerprint} differs from config hash {want}")
