"""Bit-exact layouts of the four CABBA frame types.

In-phase packets (PPM, legacy-visible)::

    A   DF17 ADS-B message, unchanged                                  112
    B1  code(5) sub(3) icao(24) key[0:50] pad(6) crc(24)               112
    B2  code(5) sub(3) icao(24) key(128) sig[0:14] interval(12) crc(24) 210
    C   code(5) sub(3) icao(24) pub[0:181] pad(5) crc(24)              242

Quadrature packets (phase overlay, 3 bits per in-phase symbol)::

    ref(12) | RS(54,34) codeword over payload[0:204] | payload[204:] | pad

with payloads

    A   mac(lambda) seq(8) pad to 204
    B1  key[50:128] interval(12) pad to 204
    B2  sig[14:512]
    C   pub[181:256] sig(512)

The interval field is the interval index modulo 4096; receivers resolve the
full index from their own clock.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import bits as bitops
from . import crc
from .errors import CrcMismatch, LayoutViolation, UnknownFrameType
from .rs import rs_54_34
from .tesla import KEY_BYTES, MAX_MAC_BITS

DF17 = 17
CABBA_CODE = 23
SUBTYPES = {"B1": 1, "B2": 2, "C": 3}
IN_PHASE_BITS = {"A": 112, "B1": 112, "B2": 210, "C": 242}
KINDS = tuple(IN_PHASE_BITS)
PREAMBLE_US = 8
REF_BITS = 12
SYMBOL_BITS = 6
RS_DATA_BITS = 34 * SYMBOL_BITS  # 204
RS_CODE_BITS = 54 * SYMBOL_BITS  # 324
INTERVAL_BITS = 12
INTERVAL_MOD = 1 << INTERVAL_BITS
SEQ_BITS = 8
PUB_BYTES = 32
SIG_BYTES = 64


def quadrature_bits(kind: str) -> int:
    return 3 * IN_PHASE_BITS[kind]


@dataclass(frozen=True, eq=False)
class BitPacket:
    bits: np.ndarray
    role: str  # "in_phase" | "quadrature"

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.uint8))

    def __len__(self):
        return len(self.bits)

    def __eq__(self, other):
        return (isinstance(other, BitPacket) and self.role == other.role
                and np.array_equal(self.bits, other.bits))

    def hex(self) -> str:
        return bitops.to_hex(self.bits)


@dataclass(frozen=True)
class FrameA:
    message: bytes  # 14-byte DF17 frame, CRC included
    mac: int
    seq: int
    mac_len: int = MAX_MAC_BITS
    kind = "A"

    @property
    def icao(self) -> int:
        return int.from_bytes(self.message[1:4], "big")


@dataclass(frozen=True)
class FrameB1:
    icao: int
    interval_index: int
    key: bytes
    kind = "B1"


@dataclass(frozen=True)
class FrameB2:
    icao: int
    interval_index: int
    key: bytes
    signature: bytes
    kind = "B2"


@dataclass(frozen=True)
class FrameC:
    icao: int
    public_key: bytes
    signature: bytes
    kind = "C"


Frame = FrameA | FrameB1 | FrameB2 | FrameC


def make_df17(icao: int, me: bytes, ca: int = 5) -> bytes:
    """Build a 112-bit DF17 extended squitter with its CRC."""
    if len(me) != 7:
        raise LayoutViolation("ME field must be 56 bits")
    head = bitops.from_int((DF17 << 3) | ca, 8)
    body = np.concatenate([head, bitops.from_int(icao, 24), bitops.from_bytes(me)])
    return bitops.to_bytes(np.concatenate([body, bitops.from_int(crc.crc24(body), 24)]))


def _check_width(name: str, value: int, nbits: int):
    if not 0 <= value < (1 << nbits):
        raise LayoutViolation(f"{name}={value} does not fit in {nbits} bits")


def _check_len(name: str, data: bytes, nbytes: int):
    if len(data) != nbytes:
        raise LayoutViolation(f"{name} must be {8 * nbytes} bits, got {8 * len(data)}")


def _with_crc(body: np.ndarray) -> np.ndarray:
    return np.concatenate([body, bitops.from_int(crc.crc24(body), 24)])


def _header(kind: str, icao: int) -> np.ndarray:
    _check_width("icao", icao, 24)
    return np.concatenate([bitops.from_int((CABBA_CODE << 3) | SUBTYPES[kind], 8),
                           bitops.from_int(icao, 24)])


def _zeros(n: int) -> np.ndarray:
    return np.zeros(n, dtype=np.uint8)


def _build_quadrature(kind: str, payload: np.ndarray) -> np.ndarray:
    head = np.concatenate([payload[:RS_DATA_BITS], _zeros(max(0, RS_DATA_BITS - len(payload)))])
    codeword = rs_54_34().encode(bitops.pack_symbols(head, SYMBOL_BITS).tolist())
    body = np.concatenate([_zeros(REF_BITS), bitops.unpack_symbols(codeword, SYMBOL_BITS),
                           payload[RS_DATA_BITS:]])
    total = quadrature_bits(kind)
    if len(body) > total:
        raise LayoutViolation(f"{kind} quadrature payload overflows {total} bits")
    return np.concatenate([body, _zeros(total - len(body))])


def _split_quadrature(kind: str, q: np.ndarray, payload_bits: int) -> tuple[np.ndarray, int]:
    codeword = bitops.pack_symbols(q[REF_BITS:REF_BITS + RS_CODE_BITS], SYMBOL_BITS).tolist()
    data, corrected = rs_54_34().decode(codeword)
    head = bitops.unpack_symbols(data, SYMBOL_BITS)
    tail_start = REF_BITS + RS_CODE_BITS
    tail = q[tail_start:tail_start + max(0, payload_bits - RS_DATA_BITS)]
    return np.concatenate([head, tail])[:payload_bits], corrected


def encode_frame(frame: Frame) -> tuple[BitPacket, BitPacket]:
    if isinstance(frame, FrameA):
        _check_len("message", frame.message, 14)
        i_bits = bitops.from_bytes(frame.message)
        if bitops.to_int(i_bits[:5]) != DF17:
            raise LayoutViolation("Type A in-phase packet must be a DF17 message")
        if not crc.check(i_bits):
            raise LayoutViolation("Type A message fails its own CRC")
        if not 1 <= frame.mac_len <= MAX_MAC_BITS:
            raise LayoutViolation(f"MAC length {frame.mac_len} outside [1, {MAX_MAC_BITS}]")
        _check_width("mac", frame.mac, frame.mac_len)
        _check_width("seq", frame.seq, SEQ_BITS)
        payload = np.concatenate([bitops.from_int(frame.mac, frame.mac_len),
                                  bitops.from_int(frame.seq, SEQ_BITS)])
    elif isinstance(frame, FrameB1):
        _check_len("key", frame.key, KEY_BYTES)
        _check_width("interval_index", frame.interval_index, INTERVAL_BITS)
        key = bitops.from_bytes(frame.key)
        i_bits = _with_crc(np.concatenate([_header("B1", frame.icao), key[:50], _zeros(6)]))
        payload = np.concatenate([key[50:], bitops.from_int(frame.interval_index, INTERVAL_BITS)])
    elif isinstance(frame, FrameB2):
        _check_len("key", frame.key, KEY_BYTES)
        _check_len("signature", frame.signature, SIG_BYTES)
        _check_width("interval_index", frame.interval_index, INTERVAL_BITS)
        sig = bitops.from_bytes(frame.signature)
        i_bits = _with_crc(np.concatenate([
            _header("B2", frame.icao), bitops.from_bytes(frame.key), sig[:14],
            bitops.from_int(frame.interval_index, INTERVAL_BITS)]))
        payload = sig[14:]
    elif isinstance(frame, FrameC):
        _check_len("public_key", frame.public_key, PUB_BYTES)
        _check_len("signature", frame.signature, SIG_BYTES)
        pub = bitops.from_bytes(frame.public_key)
        i_bits = _with_crc(np.concatenate([_header("C", frame.icao), pub[:181], _zeros(5)]))
        payload = np.concatenate([pub[181:], bitops.from_bytes(frame.signature)])
    else:
        raise UnknownFrameType(f"cannot encode {type(frame).__name__}")
    assert len(i_bits) == IN_PHASE_BITS[frame.kind]
    return (BitPacket(i_bits, "in_phase"),
            BitPacket(_build_quadrature(frame.kind, payload), "quadrature"))


def classify_frame(in_phase) -> str:
    i_bits = in_phase.bits if isinstance(in_phase, BitPacket) else np.asarray(in_phase)
    n = len(i_bits)
    if n < 8:
        raise UnknownFrameType(f"in-phase packet of {n} bits")
    code = bitops.to_int(i_bits[:5])
    sub = bitops.to_int(i_bits[5:8])
    if n == 112 and code == DF17:
        return "A"
    if code == CABBA_CODE:
        for kind, value in SUBTYPES.items():
            if sub == value and n == IN_PHASE_BITS[kind]:
                return kind
    raise UnknownFrameType(f"no frame type with length {n}, code {code}, subtype {sub}")


def decode_frame(in_phase, quadrature, mac_len: int = MAX_MAC_BITS) -> Frame:
    i_bits = in_phase.bits if isinstance(in_phase, BitPacket) else np.asarray(in_phase, np.uint8)
    q_bits = quadrature.bits if isinstance(quadrature, BitPacket) else np.asarray(quadrature, np.uint8)
    kind = classify_frame(i_bits)
    if len(q_bits) != quadrature_bits(kind):
        raise LayoutViolation(f"{kind} quadrature packet must be {quadrature_bits(kind)} bits")
    if not crc.check(i_bits):
        raise CrcMismatch(f"{kind} in-phase CRC-24 mismatch")

    if kind == "A":
        payload, _ = _split_quadrature(kind, q_bits, mac_len + SEQ_BITS)
        return FrameA(bitops.to_bytes(i_bits), bitops.to_int(payload[:mac_len]),
                      bitops.to_int(payload[mac_len:]), mac_len)
    icao = bitops.to_int(i_bits[8:32])
    if kind == "B1":
        payload, _ = _split_quadrature(kind, q_bits, 78 + INTERVAL_BITS)
        key = np.concatenate([i_bits[32:82], payload[:78]])
        return FrameB1(icao, bitops.to_int(payload[78:]), bitops.to_bytes(key))
    if kind == "B2":
        payload, _ = _split_quadrature(kind, q_bits, 498)
        sig = np.concatenate([i_bits[160:174], payload])
        return FrameB2(icao, bitops.to_int(i_bits[174:186]), bitops.to_bytes(i_bits[32:160]),
                       bitops.to_bytes(sig))
    payload, _ = _split_quadrature(kind, q_bits, 75 + 512)
    pub = np.concatenate([i_bits[32:213], payload[:75]])
    return FrameC(icao, bitops.to_bytes(pub), bitops.to_bytes(payload[75:]))


def frame_airtime_us(kind: str) -> int:
    """Channel occupancy of one frame at 1 bit/us, preamble included."""
    if kind not in IN_PHASE_BITS:
        raise UnknownFrameType(kind)
    return IN_PHASE_BITS[kind] + PREAMBLE_US


# ---- hex-dump lines: "TYPE I:<hex> Q:<hex>" ----

_LINE = re.compile(r"^\s*(A|B1|B2|C)\s+I:(\S*)\s+Q:(\S*)\s*$")
_HEX = re.compile(r"^[0-9a-fA-F]*$")


def format_line(kind: str, in_phase: BitPacket, quadrature: BitPacket) -> str:
    return f"{kind} I:{in_phase.hex()} Q:{quadrature.hex()}"


def parse_line(line: str) -> tuple[str, BitPacket, BitPacket]:
    """Parse one hex-dump line.

    Raises ValueError for syntax or non-hex characters and LayoutViolation
    when the hex is valid but too short for the declared type.
    """
    m = _LINE.match(line)
    if not m:
        raise ValueError(f"not a frame line: {line!r}")
    kind, i_hex, q_hex = m.groups()
    if not _HEX.match(i_hex) or not _HEX.match(q_hex):
        raise ValueError(f"non-hex characters in frame line: {line!r}")
    try:
        i_bits = bitops.from_hex(i_hex, IN_PHASE_BITS[kind])
        q_bits = bitops.from_hex(q_hex, quadrature_bits(kind))
    except ValueError as exc:
        raise LayoutViolation(f"truncated {kind} frame: {exc}") from None
    return kind, BitPacket(i_bits, "in_phase"), BitPacket(q_bits, "quadrature")


def encode_line(frame: Frame) -> str:
    i_pkt, q_pkt = encode_frame(frame)
    return format_line(frame.kind, i_pkt, q_pkt)


def decode_line(line: str, mac_len: int = MAX_MAC_BITS) -> Frame:
    kind, i_pkt, q_pkt = parse_line(line)
    frame = decode_frame(i_pkt, q_pkt, mac_len)
    if frame.kind != kind:
        raise UnknownFrameType(f"line labelled {kind} decodes as {frame.kind}")
    return frame


# ---- JSON records ----

def frame_to_record(frame: Frame) -> dict:
    if isinstance(frame, FrameA):
        return {"type": "A", "message": frame.message.hex(), "mac": f"{frame.mac:x}",
                "seq": frame.seq, "mac_len": frame.mac_len}
    rec = {"type": frame.kind, "icao": f"{frame.icao:06x}"}
    if isinstance(frame, (FrameB1, FrameB2)):
        rec.update(interval=frame.interval_index, key=frame.key.hex())
    if isinstance(frame, FrameB2):
        rec["signature"] = frame.signature.hex()
    if isinstance(frame, FrameC):
        rec.update(public_key=frame.public_key.hex(), signature=frame.signature.hex())
    return rec


def frame_from_record(rec: dict) -> Frame:
    """Inverse of :func:`frame_to_record`; raises ValueError on missing or bad fields."""
    try:
        kind = rec["type"]
        if kind == "A":
            return FrameA(bytes.fromhex(rec["message"]), int(rec["mac"], 16), int(rec["seq"]),
                          int(rec.get("mac_len", MAX_MAC_BITS)))
        icao = int(rec["icao"], 16)
        if kind == "B1":
            return FrameB1(icao, int(rec["interval"]), bytes.fromhex(rec["key"]))
        if kind == "B2":
            return FrameB2(icao, int(rec["interval"]), bytes.fromhex(rec["key"]),
                           bytes.fromhex(rec["signature"]))
        if kind == "C":
            return FrameC(icao, bytes.fromhex(rec["public_key"]), bytes.fromhex(rec["signature"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad frame record: {exc!r}") from None
    raise ValueError(f"unknown frame type {rec.get('type')!r}")
