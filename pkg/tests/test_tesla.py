import hashlib
import hmac

import pytest
from hypothesis import given, settings, strategies as st

from cabba.errors import ChainCorrupt, IndexOutOfRange, InvalidConfig, InvalidOrder, MacTooLong
from cabba.tesla import (
    AuthKey, KeyChain, MacTag, TeslaConfig, compute_mac, derive_auth_key, generate_chain,
    iterate, one_way, same_origin, verify_mac, verify_pledge,
)

SMALL = TeslaConfig(chain_length=32)

# frozen from an independent hashlib evaluation, seed b"cabba-test", N=4
VECTOR_KEYS = [
    "4658ac14596b5fc4df54b56651d69d3f",
    "aef8840eb4f4e2a3eb7f90604b123b72",
    "a2bb145dbdce5ca0be9360e35ad293c4",
    "78b46561dab440ff71f09ca978671482",
    "1c1847c6ae8a8b16f3e3d2f17d64e045",
]
VECTOR_AUTH_2 = "0319546dec352292ed39aaa34d5eb73f"
VECTOR_MAC_2 = 0x4bae339ebcb17e02f6db0e90a44a7db6cd794738680281830


def _oracle_chain(seed: bytes, n: int) -> list[bytes]:
    keys = [hashlib.sha256(b"\x02" + seed).digest()[:16]]
    for _ in range(n):
        keys.append(hashlib.sha256(b"\x00" + keys[-1]).digest()[:16])
    return keys


class TestConfig:
    def test_defaults(self):
        cfg = TeslaConfig()
        assert cfg.interval_duration_s == 5.0
        assert cfg.mac_len_bits == 196
        assert cfg.key_len_bits == 128
        assert cfg.max_verify_index == 2 * cfg.chain_length

    @pytest.mark.parametrize("kwargs", [
        {"interval_duration_s": 0}, {"chain_length": 0}, {"mac_len_bits": 197},
        {"mac_len_bits": 8}, {"key_len_bits": 256},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(InvalidConfig):
            TeslaConfig(**kwargs)


class TestChain:
    def test_frozen_vector(self):
        chain = generate_chain(b"cabba-test", TeslaConfig(chain_length=4))
        assert [k.hex() for k in chain.keys] == VECTOR_KEYS
        assert chain.keys == tuple(_oracle_chain(b"cabba-test", 4))

    def test_structure(self):
        chain = generate_chain(b"s", SMALL)
        assert chain.length == 32
        assert chain.pledge == chain.key(0)
        for i in range(1, 33):
            assert one_way(chain.key(i)) == chain.key(i - 1)
        assert iterate(chain.key(32), 32) == chain.pledge

    def test_key_bounds(self):
        chain = generate_chain(b"s", SMALL)
        with pytest.raises(IndexOutOfRange):
            chain.key(33)
        with pytest.raises(IndexOutOfRange):
            chain.key(-1)

    def test_distinct_seeds(self):
        assert generate_chain(b"a", SMALL).pledge != generate_chain(b"b", SMALL).pledge

    def test_dumps_loads(self):
        chain = generate_chain(b"s", SMALL)
        again = KeyChain.loads(chain.dumps())
        assert again.keys == chain.keys
        assert again.is_sound()

    def test_loads_rejects_corruption(self):
        lines = generate_chain(b"s", SMALL).dumps().splitlines()
        lines[5] = "00" * 16
        with pytest.raises(ChainCorrupt):
            KeyChain.loads("\n".join(lines))
        with pytest.raises(ChainCorrupt):
            KeyChain.loads("zz\n")
        with pytest.raises(ChainCorrupt):
            KeyChain.loads(lines[0])


class TestPledge:
    def test_every_index_verifies(self):
        chain = generate_chain(b"p", SMALL)
        for i in range(chain.length + 1):
            assert verify_pledge(chain.key(i), i, chain.pledge, SMALL)

    def test_wrong_index_or_key(self):
        chain = generate_chain(b"p", SMALL)
        assert not verify_pledge(chain.key(5), 6, chain.pledge, SMALL)
        assert not verify_pledge(chain.key(5), 4, chain.pledge, SMALL)
        other = generate_chain(b"q", SMALL)
        assert not verify_pledge(other.key(5), 5, chain.pledge, SMALL)

    def test_guard(self):
        chain = generate_chain(b"p", SMALL)
        with pytest.raises(IndexOutOfRange):
            verify_pledge(chain.key(1), SMALL.max_verify_index + 1, chain.pledge, SMALL)
        with pytest.raises(IndexOutOfRange):
            verify_pledge(chain.key(1), -1, chain.pledge, SMALL)


class TestMac:
    def test_frozen_vector(self):
        chain = generate_chain(b"cabba-test", TeslaConfig(chain_length=4))
        auth = derive_auth_key(chain.key(2), 2)
        assert auth.key.hex() == VECTOR_AUTH_2
        assert auth.key == hashlib.sha256(b"\x01" + chain.key(2)).digest()[:16]
        tag = compute_mac(b"hello", auth, 7)
        assert tag.value == VECTOR_MAC_2
        full = hmac.new(auth.key, b"hello" + bytes([7]) + (2).to_bytes(8, "big"), hashlib.sha256).digest()
        assert tag.value == int.from_bytes(full, "big") >> (256 - 196)

    def test_auth_key_differs_from_chain_step(self):
        k = generate_chain(b"x", SMALL).key(3)
        assert derive_auth_key(k, 3).key != one_way(k)

    def test_too_long(self):
        with pytest.raises(MacTooLong):
            compute_mac(b"m", AuthKey(1, bytes(16)), 0, 197)

    def test_bad_seq(self):
        with pytest.raises(ValueError):
            compute_mac(b"m", AuthKey(1, bytes(16)), 256)

    @given(st.binary(max_size=40), st.integers(0, 255), st.integers(16, 196), st.integers(1, 32))
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_and_tamper(self, msg, seq, length, interval):
        chain = generate_chain(b"mac", SMALL)
        key = chain.key(interval)
        tag = compute_mac(msg, derive_auth_key(key, interval), seq, length)
        assert tag.value >> length == 0
        assert verify_mac(msg, tag, key)
        assert not verify_mac(msg + b"!", tag, key)
        assert not verify_mac(msg, MacTag(tag.value, length, (seq + 1) % 256, interval), key)
        assert not verify_mac(msg, MacTag(tag.value, length, seq, interval), chain.key(interval - 1))
        assert not verify_mac(msg, MacTag(tag.value ^ 1, length, seq, interval), key)

    def test_truncation_is_prefix(self):
        auth = AuthKey(4, bytes(range(16)))
        long = compute_mac(b"abc", auth, 1, 196)
        short = compute_mac(b"abc", auth, 1, 64)
        assert long.value >> (196 - 64) == short.value


class TestSameOrigin:
    def test_same_chain(self):
        chain = generate_chain(b"o", SMALL)
        for a in range(0, 10):
            for b in range(a + 1, 12):
                assert same_origin(chain.key(a), a, chain.key(b), b)

    def test_different_chain(self):
        c1, c2 = generate_chain(b"o1", SMALL), generate_chain(b"o2", SMALL)
        assert not same_origin(c1.key(2), 2, c2.key(5), 5)

    def test_misaligned_index(self):
        chain = generate_chain(b"o", SMALL)
        assert not same_origin(chain.key(2), 2, chain.key(5), 6)

    def test_order_and_guard(self):
        chain = generate_chain(b"o", SMALL)
        with pytest.raises(InvalidOrder):
            same_origin(chain.key(3), 3, chain.key(3), 3)
        with pytest.raises(IndexOutOfRange):
            same_origin(chain.key(0), 0, chain.key(20), 20, max_steps=10)

    @given(st.integers(0, 31), st.integers(1, 32))
    @settings(max_examples=50, deadline=None)
    def test_property(self, a, gap):
        b = min(a + gap, 32)
        if b == a:
            return
        chain = generate_chain(b"prop", SMALL)
        assert same_origin(chain.key(a), a, chain.key(b), b)
