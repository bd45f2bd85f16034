"""Mode S CRC-24 (generator 0x1FFF409) over bit vectors."""

from __future__ import annotations

import numpy as np

GENERATOR = 0x1FFF409


def crc24(bits) -> int:
    """CRC remainder of the bit vector (parity field not included)."""
    reg = 0
    for b in np.asarray(bits, dtype=np.uint8).tolist():
        reg = (reg << 1) | b
        if reg & (1 << 24):
            reg ^= GENERATOR
    for _ in range(24):
        reg <<= 1
        if reg & (1 << 24):
            reg ^= GENERATOR
    return reg


def check(frame_bits) -> bool:
    """True when the trailing 24 bits equal the CRC of everything before them."""
    frame_bits = np.asarray(frame_bits, dtype=np.uint8)
    tail = 0
    for b in frame_bits[-24:].tolist():
        tail = (tail << 1) | b
    return crc24(frame_bits[:-24]) == tail
