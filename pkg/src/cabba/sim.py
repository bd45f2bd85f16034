"""Sender-side frame generation and scripted receiver scenarios.

An event script is a text file::

    #ca=<CA public key hex>
    #interval_s=5
    #mac_len=196
    #scheme=ed25519
    <t seconds> <TYPE> I:<hex> Q:<hex>
    ...

The receiver interval of an event is ``floor(t / interval_s)``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import frames
from .frames import Frame, FrameA, FrameB1, FrameB2, FrameC, INTERVAL_MOD
from .pki import ED25519, AircraftIdentity, CertAuthority, KeyedHashScheme, new_aircraft, sign_interval_key
from .receiver import Receiver
from .tesla import DEFAULT_CONFIG, KeyChain, TeslaConfig, compute_mac, derive_auth_key, generate_chain


def _seed_bytes(*parts) -> bytes:
    return hashlib.sha256(repr(parts).encode()).digest()


@dataclass
class Sender:
    icao: int
    chain: KeyChain
    identity: AircraftIdentity
    config: TeslaConfig = DEFAULT_CONFIG

    @classmethod
    def create(cls, ca: CertAuthority, icao: int, seed: bytes,
               config: TeslaConfig = DEFAULT_CONFIG) -> Sender:
        chain = generate_chain(_seed_bytes("chain", seed), config)
        return cls(icao, chain, new_aircraft(ca, icao, _seed_bytes("keypair", seed)), config)

    def message(self, interval: int, seq: int, me: bytes | None = None) -> FrameA:
        if me is None:
            # airborne position type code 11 with pseudo-random content
            body = _seed_bytes("me", self.chain.pledge, interval, seq)[:7]
            me = bytes([(11 << 3) | (body[0] & 7)]) + body[1:]
        msg = frames.make_df17(self.icao, me)
        tag = compute_mac(msg, derive_auth_key(self.chain.key(interval), interval), seq,
                          self.config.mac_len_bits)
        return FrameA(msg, tag.value, seq, tag.length)

    def b1(self, interval: int) -> FrameB1:
        return FrameB1(self.icao, interval % INTERVAL_MOD, self.chain.key(interval))

    def b2(self, interval: int) -> FrameB2:
        key = self.chain.key(interval)
        return FrameB2(self.icao, interval % INTERVAL_MOD, key, sign_interval_key(self.identity, key))

    def c(self) -> FrameC:
        return FrameC(self.icao, self.identity.public, self.identity.cert_signature)


def random_frame(kind: str, rng: np.random.Generator, mac_len: int = 196) -> Frame:
    """A well-formed frame of ``kind`` with uniformly random field contents."""
    def raw(n):
        return rng.bytes(n)
    icao = int(rng.integers(0, 1 << 24))
    if kind == "A":
        me = raw(7)
        return FrameA(frames.make_df17(icao, me), int.from_bytes(raw(25), "big") >> (200 - mac_len),
                      int(rng.integers(0, 256)), mac_len)
    if kind == "B1":
        return FrameB1(icao, int(rng.integers(0, INTERVAL_MOD)), raw(16))
    if kind == "B2":
        return FrameB2(icao, int(rng.integers(0, INTERVAL_MOD)), raw(16), raw(64))
    if kind == "C":
        return FrameC(icao, raw(32), raw(64))
    raise ValueError(f"unknown frame type {kind!r}")


@dataclass
class Script:
    ca_public: bytes
    events: list[tuple[float, Frame]]
    interval_s: float = 5.0
    mac_len: int = 196
    scheme: str = "ed25519"

    def dumps(self) -> str:
        lines = [f"#ca={self.ca_public.hex()}", f"#interval_s={self.interval_s:g}",
                 f"#mac_len={self.mac_len}", f"#scheme={self.scheme}"]
        lines += [f"{t:.6f} {frames.encode_line(f)}" for t, f in self.events]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> Script:
        header: dict[str, str] = {}
        raw: list[tuple[float, str]] = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                header[key.strip()] = value.strip()
                continue
            t, _, rest = line.partition(" ")
            raw.append((float(t), rest))
        if "ca" not in header:
            raise ValueError("event script lacks a #ca= header")
        mac_len = int(header.get("mac_len", 196))
        events = [(t, frames.decode_line(rest, mac_len)) for t, rest in raw]
        return cls(bytes.fromhex(header["ca"]), events, float(header.get("interval_s", 5)),
                   mac_len, header.get("scheme", "ed25519"))

    def run(self) -> Receiver:
        scheme = ED25519 if self.scheme == "ed25519" else KeyedHashScheme()
        rx = Receiver(self.ca_public, scheme)
        for t, frame in sorted(self.events, key=lambda e: e[0]):
            rx.ingest(frame, math.floor(t / self.interval_s), t)
        return rx


SCENARIOS = ("happy", "spoofer", "c-first")


def build_scenario(name: str, seed: int = 0, icao: int = 0x4840D6,
                   config: TeslaConfig = TeslaConfig(chain_length=64)) -> Script:
    """Deterministic demo scripts: a lone aircraft, aircraft plus spoofer, or C first."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}")
    ca = CertAuthority.from_seed(_seed_bytes("ca", seed))
    plane = Sender.create(ca, icao, _seed_bytes("aircraft", seed), config)
    T = config.interval_duration_s
    ev: list[tuple[float, Frame]] = []
    if name == "happy":
        for i in (1, 2, 3):
            if i > 1:
                ev.append((i * T + 0.05, plane.b2(i - 1) if i == 2 else plane.b1(i - 1)))
            ev += [(i * T + 0.5 + 0.7 * s, plane.message(i, s)) for s in range(3)]
        ev.append((3 * T + 3.0, plane.c()))
        ev.append((4 * T + 0.05, plane.b1(3)))
    elif name == "c-first":
        ev.append((1 * T + 0.02, plane.c()))
        ev += [(1 * T + 0.5 + 0.7 * s, plane.message(1, s)) for s in range(2)]
        ev.append((2 * T + 0.05, plane.b1(1)))
        ev += [(2 * T + 0.5 + 0.7 * s, plane.message(2, s)) for s in range(2)]
        ev.append((3 * T + 0.05, plane.b2(2)))
    else:
        rogue_ca = CertAuthority.from_seed(_seed_bytes("rogue-ca", seed))
        spoof = Sender.create(rogue_ca, icao, _seed_bytes("spoofer", seed), config)
        for i in (1, 2):
            if i > 1:
                ev.append((i * T + 0.05, plane.b2(i - 1)))
                ev.append((i * T + 0.08, spoof.b2(i - 1)))
            for s in range(2):
                ev.append((i * T + 0.5 + 1.1 * s, plane.message(i, s)))
                ev.append((i * T + 0.9 + 1.1 * s, spoof.message(i, s)))
        ev.append((2 * T + 3.0, spoof.c()))
        ev.append((2 * T + 3.5, plane.c()))
        ev.append((3 * T + 0.05, plane.b1(2)))
        ev.append((3 * T + 0.08, spoof.b1(2)))
    return Script(ca.public, sorted(ev, key=lambda e: e[0]), T, config.mac_len_bits)
