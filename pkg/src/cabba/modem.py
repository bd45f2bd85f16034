"""Complex-baseband phase-overlay modem: PPM amplitude plus MPSK phase.

Time is measured in 1 us symbols of ``samples_per_symbol`` samples.  A frame
is the standard 8 us ADS-B preamble followed by one PPM symbol per in-phase
bit.  Each symbol carries a 0.5 us rectangular pulse in its first half for a 1
and in its second half for a 0; the PSK symbol for slot ``k`` rotates the
phase of that pulse.  Off half-symbols are silent, so ``|sample|`` is exactly
the PPM envelope whatever the phase content.

All transforms accept leading batch dimensions (bits shaped ``(..., n)``).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bits as bitops
from .errors import AlignmentError, InvalidConfig, NoPreamble, SymbolAlignment
from .frames import BitPacket

PREAMBLE_US = 8
PREAMBLE_PULSES_US = (0.0, 1.0, 3.5, 4.5)
REF_BITS = 12


@dataclass(frozen=True)
class ModemConfig:
    samples_per_symbol: int = 10
    psk_order: int = 8
    encoding: str = "differential"  # or "absolute"
    mapping: str = "natural"  # label = 4*b0 + 2*b1 + b2; "gray" for Gray labels
    symbol_period_us: float = 1.0
    ppm_index: float = 0.5

    def __post_init__(self):
        if self.samples_per_symbol < 4 or self.samples_per_symbol % 2:
            raise InvalidConfig("samples_per_symbol must be even and at least 4")
        if self.psk_order not in (8, 16):
            raise InvalidConfig("psk_order must be 8 or 16")
        if self.encoding not in ("differential", "absolute"):
            raise InvalidConfig(f"unknown encoding {self.encoding!r}")
        if self.mapping not in ("natural", "gray"):
            raise InvalidConfig(f"unknown mapping {self.mapping!r}")

    @property
    def bits_per_symbol(self) -> int:
        return self.psk_order.bit_length() - 1

    @property
    def sample_rate_hz(self) -> float:
        return self.samples_per_symbol * 1e6 / self.symbol_period_us

    @property
    def half(self) -> int:
        return self.samples_per_symbol // 2


@dataclass(frozen=True, eq=False)
class BasebandSignal:
    samples: np.ndarray
    sample_rate_hz: float

    @property
    def samples_per_symbol(self) -> int:
        return int(round(self.sample_rate_hz * 1e-6))

    def __len__(self):
        return self.samples.shape[-1]


def _bits(packet) -> np.ndarray:
    return packet.bits if isinstance(packet, BitPacket) else np.asarray(packet, dtype=np.uint8)


def preamble_envelope(cfg: ModemConfig) -> np.ndarray:
    sps = cfg.samples_per_symbol
    env = np.zeros(PREAMBLE_US * sps)
    for t in PREAMBLE_PULSES_US:
        start = int(round(t * sps))
        env[start:start + cfg.half] = 1.0
    return env


def ppm_modulate(in_phase, cfg: ModemConfig = ModemConfig()) -> np.ndarray:
    """Real envelope: preamble then one half-symbol pulse per bit."""
    b = _bits(in_phase)
    first = np.repeat(b[..., :, None], cfg.half, axis=-1)
    body = np.concatenate([first, 1 - first], axis=-1).reshape(*b.shape[:-1], -1)
    pre = np.broadcast_to(preamble_envelope(cfg), (*b.shape[:-1], PREAMBLE_US * cfg.samples_per_symbol))
    return np.concatenate([pre, body], axis=-1).astype(float)


def _gray(v):
    return v ^ (v >> 1)


def _gray_inverse(v, width: int):
    out = np.array(v, copy=True)
    shift = 1
    while shift < width:
        out = out ^ (out >> shift)
        shift <<= 1
    return out


def labels_to_index(labels, cfg: ModemConfig):
    if cfg.mapping == "gray":
        return _gray_inverse(np.asarray(labels), cfg.bits_per_symbol)
    return np.asarray(labels)


def index_to_labels(index, cfg: ModemConfig):
    index = np.asarray(index)
    return _gray(index) if cfg.mapping == "gray" else index


def psk_modulate(quadrature, cfg: ModemConfig = ModemConfig()) -> np.ndarray:
    """Per-symbol carrier phase in radians.

    The symbol value of bits (b0, b1, b2) is 4*b0 + 2*b1 + b2.  Absolute
    encoding uses phase 2*pi*symbol/M directly; differential encoding adds it
    to the previous phase, starting from the preamble's zero phase.
    """
    b = _bits(quadrature)
    k = cfg.bits_per_symbol
    if b.shape[-1] % k:
        raise SymbolAlignment(f"{b.shape[-1]} bits is not a multiple of {k}")
    index = labels_to_index(bitops.pack_symbols(b, k), cfg)
    if cfg.encoding == "differential":
        index = np.cumsum(index, axis=-1) % cfg.psk_order
    return 2 * np.pi * index / cfg.psk_order


def iq_compose(ppm: np.ndarray, phases: np.ndarray, cfg: ModemConfig = ModemConfig()) -> BasebandSignal:
    sps = cfg.samples_per_symbol
    n_symbols = ppm.shape[-1] // sps - PREAMBLE_US
    if ppm.shape[-1] % sps or phases.shape[-1] != n_symbols:
        raise AlignmentError(f"{phases.shape[-1]} phases for {n_symbols} PPM symbols")
    per_sample = np.repeat(phases, sps, axis=-1)
    lead = np.zeros((*phases.shape[:-1], PREAMBLE_US * sps))
    theta = np.concatenate([lead, per_sample], axis=-1)
    return BasebandSignal(ppm * np.exp(1j * theta), cfg.sample_rate_hz)


def pad_quadrature(quadrature, n_symbols: int, cfg: ModemConfig) -> np.ndarray:
    """Zero-fill a quadrature packet to exactly ``n_symbols`` PSK symbols."""
    q = _bits(quadrature)
    capacity = n_symbols * cfg.bits_per_symbol
    if q.shape[-1] > capacity:
        raise AlignmentError(f"{q.shape[-1]} quadrature bits exceed {capacity}")
    pad = np.zeros((*q.shape[:-1], capacity - q.shape[-1]), dtype=np.uint8)
    return np.concatenate([q, pad], axis=-1)


def modulate(in_phase, quadrature, cfg: ModemConfig = ModemConfig()) -> BasebandSignal:
    i_bits = _bits(in_phase)
    q_bits = pad_quadrature(quadrature, i_bits.shape[-1], cfg)
    return iq_compose(ppm_modulate(i_bits, cfg), psk_modulate(q_bits, cfg), cfg)


def _halves(samples: np.ndarray, cfg: ModemConfig) -> np.ndarray:
    """Payload samples reshaped to (..., n_symbols, 2, half)."""
    sps = cfg.samples_per_symbol
    body = samples[..., PREAMBLE_US * sps:]
    n = body.shape[-1] // sps
    return body[..., : n * sps].reshape(*body.shape[:-1], n, 2, cfg.half)


def check_preamble(signal: BasebandSignal, cfg: ModemConfig = ModemConfig()) -> None:
    env = preamble_envelope(cfg).astype(bool)
    if signal.samples.shape[-1] < env.size:
        raise NoPreamble("signal shorter than the preamble")
    power = np.abs(signal.samples[..., : env.size]) ** 2
    on = power[..., env].mean(axis=-1)
    off = power[..., ~env].mean(axis=-1)
    if np.any(~(on > 2 * off)) or np.any(on <= 0):
        raise NoPreamble("preamble pulse pattern not found")


def ppm_demodulate(signal: BasebandSignal, cfg: ModemConfig = ModemConfig(),
                   preamble: bool = True) -> np.ndarray:
    """Legacy decision on |sample| only: bit 1 iff first half has more energy."""
    if preamble:
        check_preamble(signal, cfg)
    energy = (np.abs(_halves(signal.samples, cfg)) ** 2).sum(axis=-1)
    return (energy[..., 0] > energy[..., 1]).astype(np.uint8)


def psk_demodulate(signal: BasebandSignal, cfg: ModemConfig = ModemConfig(),
                   in_phase=None, preamble: bool = True) -> np.ndarray:
    """Hard-decision MPSK on the pulse-active half of every symbol.

    The active half comes from ``in_phase`` when given, otherwise from the
    larger coherent sum.  Differential mode decides each absolute phase index
    and differences consecutive decisions, the first against the preamble.
    """
    if preamble:
        check_preamble(signal, cfg)
    sums = _halves(signal.samples, cfg).sum(axis=-1)
    if in_phase is None:
        first = np.abs(sums[..., 0]) > np.abs(sums[..., 1])
    else:
        first = _bits(in_phase).astype(bool)
    z = np.where(first, sums[..., 0], sums[..., 1])
    m = cfg.psk_order
    index = np.rint(np.angle(z) * m / (2 * np.pi)).astype(np.int64) % m
    if cfg.encoding == "differential":
        env = preamble_envelope(cfg).astype(bool)
        ref_z = signal.samples[..., : env.size][..., env].sum(axis=-1)
        ref = np.rint(np.angle(ref_z) * m / (2 * np.pi)).astype(np.int64) % m
        prev = np.concatenate([np.asarray(ref)[..., None], index[..., :-1]], axis=-1)
        index = (index - prev) % m
    return bitops.unpack_symbols(index_to_labels(index, cfg), cfg.bits_per_symbol)


def demodulate(signal: BasebandSignal, cfg: ModemConfig = ModemConfig(),
               quadrature_len: int | None = None) -> tuple[BitPacket, BitPacket]:
    """Recover both logical packets from one frame's samples.

    The quadrature packet is truncated to ``quadrature_len`` bits, by default
    three per in-phase bit.
    """
    i_bits = ppm_demodulate(signal, cfg)
    q_bits = psk_demodulate(signal, cfg, preamble=False)
    n = 3 * i_bits.shape[-1] if quadrature_len is None else quadrature_len
    return BitPacket(i_bits, "in_phase"), BitPacket(q_bits[..., :n], "quadrature")


# ---- bursts and sample files ----

GAP_US = 16


def join_bursts(signals: list[BasebandSignal], gap_us: int = GAP_US) -> BasebandSignal:
    if not signals:
        raise ValueError("no signals to join")
    rate = signals[0].sample_rate_hz
    gap = np.zeros(int(round(gap_us * rate * 1e-6)), dtype=complex)
    parts = []
    for s in signals:
        parts += [s.samples, gap]
    return BasebandSignal(np.concatenate(parts), rate)


def split_bursts(signal: BasebandSignal, threshold: float = 0.5,
                 min_gap_us: float = 5.0) -> list[BasebandSignal]:
    """Cut a sample stream at silent runs longer than any in-frame gap (3 us)."""
    sps = signal.samples_per_symbol
    active = np.flatnonzero(np.abs(signal.samples) > threshold)
    if active.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(active) > min_gap_us * sps)
    starts = np.concatenate([[active[0]], active[breaks + 1]])
    ends = np.concatenate([active[breaks], [active[-1]]]) + 1
    out = []
    for a, b in zip(starts, ends):
        n_symbols = int(np.ceil((b - a) / sps)) - PREAMBLE_US
        stop = a + (PREAMBLE_US + n_symbols) * sps
        seg = signal.samples[a:stop]
        if seg.size < stop - a:
            seg = np.concatenate([seg, np.zeros(stop - a - seg.size, dtype=complex)])
        out.append(BasebandSignal(seg, signal.sample_rate_hz))
    return out


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".hdr")


def write_iq(path, signal: BasebandSignal) -> None:
    """Interleaved little-endian float32 I,Q pairs plus a ``#sr=`` sidecar."""
    s = np.asarray(signal.samples).reshape(-1)
    inter = np.empty(2 * s.size, dtype="<f4")
    inter[0::2] = s.real
    inter[1::2] = s.imag
    Path(path).write_bytes(inter.tobytes())
    sidecar_path(path).write_text(f"#sr={signal.sample_rate_hz:.0f}\n")


def read_iq(path) -> BasebandSignal:
    side = sidecar_path(path)
    if not side.exists():
        raise FileNotFoundError(f"missing sample-rate sidecar {side}")
    rate = None
    for line in side.read_text().splitlines():
        if line.startswith("#sr="):
            rate = float(line[4:])
    if rate is None:
        raise ValueError(f"sidecar {side} has no #sr= line")
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f4")
    if raw.size % 2:
        raise ValueError("odd number of floats in I/Q file")
    return BasebandSignal((raw[0::2] + 1j * raw[1::2]).astype(complex), rate)
