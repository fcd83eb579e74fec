"""Stable fingerprints of JSON-like configuration objects."""
from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace, floats via repr."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def fingerprint(obj, length: int = 16) -> str:
    """Hex digest prefix of the SHA-256 of :func:`canonical_json`."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:length]
