"""Independent FNV-1a reference, written separately from the package's copy.

Decimal constants and struct-based key packing on purpose: the point is a
second derivation of the same bit pattern, not shared code.
"""

from __future__ import annotations

import struct

_OFFSET_BASIS = 14695981039346656037
_PRIME = 1099511628211
_MOD = 2**64


def fnv1a64_reference(data: bytes) -> int:
    value = _OFFSET_BASIS
    for byte in data:
        value = ((value ^ byte) * _PRIME) % _MOD
    return value


def keyed_hash_reference(payload: bytes, pair_index: int) -> int:
    return fnv1a64_reference(struct.pack("<Q", pair_index) + payload)
