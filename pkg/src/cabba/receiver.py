"""Per-ICAO receiver state machine for CABBA authentication.

States::

    S0  nothing but (possibly) buffered Type A messages
    S1  an unsigned interval key (B1) was received
    S2  a signed interval key (B2), no valid certificate yet
    S3  a CA-valid certificate (C), no signed key yet
    S4  certificate (v1) and a signed key verified under it (v2)

S2 and S3 are incomparable; the machine never moves down the order
S0 < S1 < {S2, S3} < S4.

Type A messages are stamped with the receiver's interval, never the
sender's.  A key disclosed at receiver interval ``r`` is for interval ``r-1``
(or earlier, resolved from its 12-bit index field), so it can only check
messages that arrived before it was released.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .frames import INTERVAL_MOD, Frame, FrameA, FrameB1, FrameB2, FrameC
from .pki import ED25519, SignatureScheme, verify_identity, verify_interval_key
from .tesla import DEFAULT_CONFIG, MacTag, TeslaConfig, same_origin, verify_mac
from .errors import IndexOutOfRange

RANK = {"S0": 0, "S1": 1, "S2": 2, "S3": 2, "S4": 3}


@dataclass
class Entry:
    entry_id: int
    message: bytes
    seq: int
    mac: int
    mac_len: int
    interval: int
    integrity: str = "unknown"  # unknown | ok | failed
    origin: str = "unauthenticated"
    stream_id: int | None = None
    duplicate: bool = False
    expired: bool = False
    tried: set = field(default_factory=set, repr=False)

    def verdict(self) -> MessageVerdict:
        return MessageVerdict(self.entry_id, self.integrity, self.origin, self.stream_id,
                              self.duplicate, self.expired)


@dataclass(frozen=True)
class MessageVerdict:
    entry_id: int
    integrity: str
    origin: str
    stream_id: int | None
    duplicate: bool = False
    expired: bool = False


@dataclass
class KeyStream:
    stream_id: int
    anchor: tuple[int, bytes]
    keys: dict[int, bytes] = field(default_factory=dict)
    verdict: str = "unauthenticated"  # | authenticated | impostor-candidate


def resolve_interval(wire_index: int, rx_interval: int) -> int:
    """Latest interval before ``rx_interval`` congruent to the wire index."""
    last = rx_interval - 1
    return last - ((last - wire_index) % INTERVAL_MOD)


def check_integrity(entry: Entry, disclosed_key: bytes) -> str:
    tag = MacTag(entry.mac, entry.mac_len, entry.seq, entry.interval)
    return "ok" if verify_mac(entry.message, tag, disclosed_key) else "failed"


class ReceiverContext:
    """Authentication state for every frame claiming one ICAO address.

    Not thread-safe; use one context per address and per writer.
    """

    def __init__(self, icao: int, ca_public: bytes, scheme: SignatureScheme = ED25519,
                 config: TeslaConfig = DEFAULT_CONFIG, horizon: int = 3):
        self.icao = icao
        self.ca_public = ca_public
        self.scheme = scheme
        self.config = config
        self.horizon = horizon
        self.state = "S0"
        self.entries: dict[int, Entry] = {}
        self.pending: set[int] = set()
        self.streams: list[KeyStream] = []
        self.signed_keys: list[tuple[int, bytes, bytes]] = []
        self.certificates: list[bytes] = []
        self._v2_cache: dict[tuple[bytes, bytes, bytes], bool] = {}
        self._next_entry = 0

    # -- streams --

    def _related(self, stream: KeyStream, key: bytes, index: int) -> bool:
        near = min(stream.keys, key=lambda k: abs(k - index))
        known = stream.keys[near]
        try:
            if index == near:
                return key == known
            if index > near:
                return same_origin(known, near, key, index, self.config.max_verify_index)
            return same_origin(key, index, known, near, self.config.max_verify_index)
        except IndexOutOfRange:
            return False

    def assign_stream(self, key: bytes, interval: int) -> int:
        for stream in self.streams:
            if self._related(stream, key, interval):
                stream.keys[interval] = key
                return stream.stream_id
        stream = KeyStream(len(self.streams), (interval, key), {interval: key})
        self.streams.append(stream)
        if len(self.streams) > 1:
            for s in self.streams:
                if s.verdict != "authenticated":
                    s.verdict = "impostor-candidate"
        return stream.stream_id

    def stream(self, stream_id: int) -> KeyStream:
        return self.streams[stream_id]

    # -- verification --

    def _verify_interval(self, key: bytes, index: int, stream_id: int, changed: dict):
        for eid in sorted(self.pending):
            entry = self.entries[eid]
            if entry.interval != index or entry.integrity == "ok" or key in entry.tried:
                continue
            entry.tried.add(key)
            result = check_integrity(entry, key)
            if result == "ok":
                entry.integrity = "ok"
                entry.stream_id = stream_id
                self.pending.discard(eid)
                entry.duplicate = any(
                    o is not entry and o.integrity == "ok" and o.stream_id == stream_id
                    and o.interval == entry.interval and o.seq == entry.seq
                    for o in self.entries.values())
                if self.streams[stream_id].verdict == "authenticated":
                    entry.origin = "authenticated"
                changed[eid] = entry
            elif entry.integrity == "unknown":
                entry.integrity = "failed"
                changed[eid] = entry

    def _verified_signed_keys(self):
        for index, key, sig in self.signed_keys:
            for pub in self.certificates:
                memo = (pub, sig, key)
                if memo not in self._v2_cache:
                    self._v2_cache[memo] = verify_interval_key(pub, sig, key, self.scheme)
                if self._v2_cache[memo]:
                    yield index, key
                    break

    def authenticate_streams(self, changed: dict | None = None) -> list[MessageVerdict]:
        """Mark streams holding a v2-verified key and their messages authenticated."""
        changed = {} if changed is None else changed
        if self.state != "S4":
            return []
        for index, key in self._verified_signed_keys():
            sid = self.assign_stream(key, index)
            self.streams[sid].verdict = "authenticated"
        authed = {s.stream_id for s in self.streams if s.verdict == "authenticated"}
        for entry in self.entries.values():
            if entry.integrity == "ok" and entry.stream_id in authed and entry.origin != "authenticated":
                entry.origin = "authenticated"
                changed[entry.entry_id] = entry
        return [e.verdict() for e in changed.values()]

    def _expire(self, rx_interval: int, changed: dict):
        for eid in sorted(self.pending):
            entry = self.entries[eid]
            if rx_interval - entry.interval > self.horizon:
                self.pending.discard(eid)
                if entry.integrity == "unknown":
                    entry.expired = True
                    changed[eid] = entry

    # -- input --

    def ingest(self, frame: Frame, rx_interval: int) -> list[MessageVerdict]:
        """Process one decoded frame received during ``rx_interval``.

        Returns the verdicts that changed.  Frames for another address or
        with unusable fields are ignored without any state change.
        """
        if frame.icao != self.icao:
            return []
        changed: dict[int, Entry] = {}
        self._expire(rx_interval, changed)

        if isinstance(frame, FrameA):
            self._ingest_message(frame, rx_interval, changed)
        elif isinstance(frame, (FrameB1, FrameB2)):
            index = resolve_interval(frame.interval_index, rx_interval)
            if index < 0:
                return [e.verdict() for e in changed.values()]
            sid = self.assign_stream(frame.key, index)
            self._verify_interval(frame.key, index, sid, changed)
            if isinstance(frame, FrameB2):
                self.signed_keys.append((index, frame.key, frame.signature))
                if self.state in ("S0", "S1"):
                    self.state = "S2"
            elif self.state == "S0":
                self.state = "S1"
        elif isinstance(frame, FrameC):
            if not verify_identity(self.ca_public, frame.signature, frame.public_key,
                                   self.icao, self.scheme):
                return [e.verdict() for e in changed.values()]
            if frame.public_key not in self.certificates:
                self.certificates.append(frame.public_key)
            if self.state in ("S0", "S1"):
                self.state = "S3"

        if self.state != "S4" and self.certificates and any(True for _ in self._verified_signed_keys()):
            self.state = "S4"
        self.authenticate_streams(changed)
        return [e.verdict() for e in changed.values()]

    def _ingest_message(self, frame: FrameA, rx_interval: int, changed: dict):
        entry = Entry(self._next_entry, frame.message, frame.seq, frame.mac, frame.mac_len, rx_interval)
        self._next_entry += 1
        for other in self.entries.values():
            if (other.interval, other.seq, other.message, other.mac) == \
                    (entry.interval, entry.seq, entry.message, entry.mac):
                entry.duplicate = True
                break
        self.entries[entry.entry_id] = entry
        if entry.duplicate:
            changed[entry.entry_id] = entry
            return
        self.pending.add(entry.entry_id)

    def verdicts(self) -> list[MessageVerdict]:
        return [e.verdict() for e in self.entries.values()]


class Receiver:
    """Routes frames to one :class:`ReceiverContext` per ICAO and keeps an event log."""

    def __init__(self, ca_public: bytes, scheme: SignatureScheme = ED25519,
                 config: TeslaConfig = DEFAULT_CONFIG, horizon: int = 3):
        self.ca_public = ca_public
        self.scheme = scheme
        self.config = config
        self.horizon = horizon
        self.contexts: dict[int, ReceiverContext] = {}
        self.events: list[dict] = []

    def context(self, icao: int) -> ReceiverContext:
        if icao not in self.contexts:
            self.contexts[icao] = ReceiverContext(icao, self.ca_public, self.scheme,
                                                  self.config, self.horizon)
        return self.contexts[icao]

    def ingest(self, frame: Frame, rx_interval: int, t: float | None = None) -> list[MessageVerdict]:
        ctx = self.context(frame.icao)
        before = ctx.state
        updates = ctx.ingest(frame, rx_interval)
        self.events.append({"t": t, "icao": f"{frame.icao:06x}", "frame_type": frame.kind,
                            "state_before": before, "state_after": ctx.state,
                            "verdicts_changed": len(updates)})
        return updates

    def event_log(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def summary(self) -> list[dict]:
        out = []
        for icao in sorted(self.contexts):
            ctx = self.contexts[icao]
            out.append({
                "icao": f"{icao:06x}", "state": ctx.state,
                "streams": [{"stream_id": s.stream_id, "verdict": s.verdict,
                             "intervals": sorted(s.keys)} for s in ctx.streams],
                "messages": [asdict(v) for v in ctx.verdicts()],
            })
        return out
