"""TESLA one-way keychains, interval authentication keys and truncated MACs.

The chain is built backwards from a secret head: ``K_N`` is derived from the
seed, then ``K_{i-1} = F(K_i)`` down to the pledge ``K_0``.  Keys are disclosed
in increasing index order, so anyone holding an earlier key can check a later
one by hashing forward.

``F`` and ``F'`` are SHA-256 truncated to 128 bits with one-byte domain
prefixes (0x00 and 0x01); the head derivation uses 0x02.  MACs are
HMAC-SHA256 over ``message || seq || interval``.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from .errors import ChainCorrupt, IndexOutOfRange, InvalidConfig, InvalidOrder, MacTooLong

KEY_BYTES = 16
KEY_BITS = 128
MAX_MAC_BITS = 196
MIN_MAC_BITS = 16

_F_PREFIX = b"\x00"
_F_PRIME_PREFIX = b"\x01"
_HEAD_PREFIX = b"\x02"


@dataclass(frozen=True)
class TeslaConfig:
    interval_duration_s: float = 5.0
    # one day of 5 s intervals
    chain_length: int = 17280
    mac_len_bits: int = MAX_MAC_BITS
    key_len_bits: int = KEY_BITS

    def __post_init__(self):
        if self.interval_duration_s <= 0:
            raise InvalidConfig("interval_duration_s must be positive")
        if self.chain_length < 1:
            raise InvalidConfig("chain_length must be at least 1")
        if not MIN_MAC_BITS <= self.mac_len_bits <= MAX_MAC_BITS:
            raise InvalidConfig(f"mac_len_bits must lie in [{MIN_MAC_BITS}, {MAX_MAC_BITS}]")
        if self.key_len_bits != KEY_BITS:
            raise InvalidConfig("key_len_bits is fixed at 128")

    @property
    def max_verify_index(self) -> int:
        """Ceiling on hash iterations accepted from untrusted input."""
        return 2 * self.chain_length


DEFAULT_CONFIG = TeslaConfig()


def one_way(key: bytes) -> bytes:
    """The chain function F."""
    return hashlib.sha256(_F_PREFIX + key).digest()[:KEY_BYTES]


def iterate(key: bytes, times: int) -> bytes:
    for _ in range(times):
        key = one_way(key)
    return key


@dataclass(frozen=True)
class KeyChain:
    keys: tuple[bytes, ...]  # K_N ... K_0
    seed: bytes | None = None

    @property
    def length(self) -> int:
        return len(self.keys) - 1

    @property
    def pledge(self) -> bytes:
        return self.keys[-1]

    def key(self, index: int) -> bytes:
        if not 0 <= index <= self.length:
            raise IndexOutOfRange(f"interval {index} outside chain of length {self.length}")
        return self.keys[self.length - index]

    def is_sound(self) -> bool:
        return all(one_way(self.keys[k]) == self.keys[k + 1] for k in range(self.length))

    def dumps(self) -> str:
        """Hex-lines text: one key per line, K_N first, pledge last."""
        return "".join(k.hex() + "\n" for k in self.keys)

    @classmethod
    def loads(cls, text: str) -> KeyChain:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        try:
            keys = tuple(bytes.fromhex(ln) for ln in lines)
        except ValueError as exc:
            raise ChainCorrupt(f"bad hex in key file: {exc}") from None
        if len(keys) < 2 or any(len(k) != KEY_BYTES for k in keys):
            raise ChainCorrupt("key file must hold at least two 128-bit keys")
        chain = cls(keys)
        if not chain.is_sound():
            raise ChainCorrupt("consecutive keys do not satisfy K_(i-1) = F(K_i)")
        return chain


@dataclass(frozen=True)
class AuthKey:
    interval_index: int
    key: bytes


@dataclass(frozen=True)
class MacTag:
    """Truncated MAC (as an integer of ``length`` bits) plus the sequence number."""

    value: int
    length: int
    seq: int
    interval_index: int

    def __post_init__(self):
        if not 0 <= self.seq <= 255:
            raise ValueError("seq must fit in 8 bits")
        if self.value >> self.length:
            raise ValueError("MAC value wider than its length")


def generate_chain(seed: bytes, config: TeslaConfig = DEFAULT_CONFIG) -> KeyChain:
    if config.chain_length < 1:
        raise InvalidConfig("chain_length must be at least 1")
    head = hashlib.sha256(_HEAD_PREFIX + seed).digest()[:KEY_BYTES]
    keys = [head]
    for _ in range(config.chain_length):
        keys.append(one_way(keys[-1]))
    return KeyChain(tuple(keys), seed)


def verify_pledge(candidate: bytes, claimed_index: int, pledge: bytes,
                  config: TeslaConfig = DEFAULT_CONFIG) -> bool:
    if not 0 <= claimed_index <= config.max_verify_index:
        raise IndexOutOfRange(
            f"claimed index {claimed_index} outside [0, {config.max_verify_index}]")
    return hmac.compare_digest(iterate(candidate, claimed_index), pledge)


def derive_auth_key(interval_key: bytes, interval_index: int) -> AuthKey:
    """K_i' = F'(K_i)."""
    key = hashlib.sha256(_F_PRIME_PREFIX + interval_key).digest()[:KEY_BYTES]
    return AuthKey(interval_index, key)


def _mac_input(message: bytes, seq: int, interval_index: int) -> bytes:
    return message + bytes([seq]) + interval_index.to_bytes(8, "big")


def compute_mac(message: bytes, auth_key: AuthKey, seq: int,
                mac_len_bits: int = MAX_MAC_BITS) -> MacTag:
    if mac_len_bits > MAX_MAC_BITS:
        raise MacTooLong(f"MAC of {mac_len_bits} bits exceeds {MAX_MAC_BITS}")
    if mac_len_bits < 1:
        raise ValueError("MAC length must be positive")
    if not 0 <= seq <= 255:
        raise ValueError("seq must fit in 8 bits")
    digest = hmac.new(auth_key.key, _mac_input(message, seq, auth_key.interval_index),
                      hashlib.sha256).digest()
    value = int.from_bytes(digest, "big") >> (8 * len(digest) - mac_len_bits)
    return MacTag(value, mac_len_bits, seq, auth_key.interval_index)


def verify_mac(message: bytes, tag: MacTag, interval_key: bytes) -> bool:
    auth = derive_auth_key(interval_key, tag.interval_index)
    expected = compute_mac(message, auth, tag.seq, tag.length)
    return hmac.compare_digest(expected.value.to_bytes(25, "big"), tag.value.to_bytes(25, "big"))


def same_origin(key_a: bytes, interval_a: int, key_b: bytes, interval_b: int,
                max_steps: int | None = None) -> bool:
    """True iff ``key_a = F^(interval_b - interval_a)(key_b)``."""
    if interval_b <= interval_a:
        raise InvalidOrder("interval_b must be greater than interval_a")
    steps = interval_b - interval_a
    if max_steps is not None and steps > max_steps:
        raise IndexOutOfRange(f"{steps} hash steps exceeds guard of {max_steps}")
    return hmac.compare_digest(iterate(key_b, steps), key_a)
