"""Bit-vector helpers shared by the codec and the modem.

Bit vectors are numpy ``uint8`` arrays holding 0/1, most significant bit first.
"""

from __future__ import annotations

import numpy as np


def from_int(value: int, nbits: int) -> np.ndarray:
    if value < 0 or value >> nbits:
        raise ValueError(f"{value} does not fit in {nbits} bits")
    return np.array([(value >> (nbits - 1 - k)) & 1 for k in range(nbits)], dtype=np.uint8)


def to_int(bits) -> int:
    value = 0
    for b in np.asarray(bits, dtype=np.uint8).tolist():
        value = (value << 1) | b
    return value


def from_bytes(data: bytes, nbits: int | None = None) -> np.ndarray:
    out = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    return out if nbits is None else out[:nbits]


def to_bytes(bits) -> bytes:
    """Pack bits into bytes, zero-padding the last byte on the right."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def to_hex(bits) -> str:
    """Hex string of a bit vector, padded on the right to a nibble boundary."""
    bits = np.asarray(bits, dtype=np.uint8)
    pad = (-len(bits)) % 4
    padded = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    nibbles = padded.reshape(-1, 4) @ np.array([8, 4, 2, 1])
    return "".join(f"{n:x}" for n in nibbles)


def from_hex(text: str, nbits: int) -> np.ndarray:
    """Inverse of :func:`to_hex`; raises ValueError on non-hex or short input."""
    nibbles = [int(c, 16) for c in text]
    if len(nibbles) * 4 < nbits:
        raise ValueError(f"need {nbits} bits, got {len(nibbles) * 4}")
    out = np.array([(n >> s) & 1 for n in nibbles for s in (3, 2, 1, 0)], dtype=np.uint8)
    return out[:nbits]


def pack_symbols(bits, width: int) -> np.ndarray:
    """Group a bit vector (length divisible by ``width``) into integer symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    weights = 1 << np.arange(width - 1, -1, -1)
    return bits.reshape(*bits.shape[:-1], -1, width) @ weights


def unpack_symbols(symbols, width: int) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1)
    out = (symbols[..., None] >> shifts) & 1
    return out.reshape(*symbols.shape[:-1], -1).astype(np.uint8)
