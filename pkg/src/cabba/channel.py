"""AWGN channel and Monte-Carlo BER sweeps against closed-form MPSK curves."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .modem import BasebandSignal, ModemConfig, modulate, ppm_demodulate, psk_demodulate

FRAME_SYMBOLS = 112


@dataclass(frozen=True)
class AwgnChannel:
    ebno_db: float
    rng_seed: int = 0


@dataclass(frozen=True)
class BerPoint:
    ebno_db: float
    order: int
    bits_sent: int
    bit_errors: int
    theory_ber: float
    ppm_bits: int = 0
    ppm_errors: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent

    @property
    def ppm_ber(self) -> float:
        return self.ppm_errors / self.ppm_bits if self.ppm_bits else float("nan")


def symbol_energy(signal: BasebandSignal) -> float:
    """Energy per 1 us symbol: half a symbol of pulse at the active-sample power."""
    mag2 = np.abs(signal.samples) ** 2
    active = mag2[mag2 > 0]
    power = float(active.mean()) if active.size else 0.0
    return power * signal.samples_per_symbol / 2


def noise_density(signal: BasebandSignal, ebno_db: float, bits_per_symbol: int) -> float:
    """N0 per complex sample for the requested Eb/N0."""
    eb = symbol_energy(signal) / bits_per_symbol
    return eb / 10 ** (ebno_db / 10)


def apply_awgn(signal: BasebandSignal, channel: AwgnChannel, bits_per_symbol: int,
               n0: float | None = None) -> BasebandSignal:
    """Add complex Gaussian noise with variance N0/2 per component."""
    if math.isinf(channel.ebno_db) and channel.ebno_db > 0:
        return signal
    if n0 is None:
        n0 = noise_density(signal, channel.ebno_db, bits_per_symbol)
    rng = np.random.default_rng(channel.rng_seed)
    sigma = math.sqrt(n0 / 2)
    noise = rng.normal(0.0, sigma, signal.samples.shape) + 1j * rng.normal(0.0, sigma, signal.samples.shape)
    return BasebandSignal(signal.samples + noise, signal.sample_rate_hz)


def measured_ebno_db(clean: BasebandSignal, noisy: BasebandSignal, bits_per_symbol: int) -> float:
    n0 = float(np.mean(np.abs(noisy.samples - clean.samples) ** 2))
    return 10 * math.log10(symbol_energy(clean) / bits_per_symbol / n0)


def _qfunc(x):
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2))


def mean_adjacent_distance(order: int, mapping: str) -> float:
    """Average Hamming distance between labels of neighbouring constellation points."""
    idx = np.arange(order)
    labels = idx ^ (idx >> 1) if mapping == "gray" else idx
    nxt = np.roll(labels, -1)
    return float(np.mean([bin(int(a ^ b)).count("1") for a, b in zip(labels, nxt)]))


def theoretical_psk_ber(order: int, ebno_db: float, mapping: str = "gray",
                        encoding: str = "absolute") -> float:
    """Nearest-neighbour approximation of coherent MPSK bit error rate.

    ``2/log2(M) * Q(sqrt(2 log2(M) Eb/N0) sin(pi/M))`` for Gray labels; other
    labelings scale by their mean neighbour Hamming distance, and differential
    decoding of coherent decisions doubles the symbol errors.
    """
    if order not in (8, 16, 32):
        raise ValueError(f"unsupported PSK order {order}")
    k = order.bit_length() - 1
    ebno = 10 ** (ebno_db / 10)
    ber = 2 / k * float(_qfunc(math.sqrt(2 * k * ebno) * math.sin(math.pi / order)))
    ber *= mean_adjacent_distance(order, mapping)
    if encoding == "differential":
        ber *= 2
    return min(ber, 0.5)


def _batch_seed(seed: int, point: int, batch: int) -> int:
    state = np.random.SeedSequence([seed, point, batch]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def _run_point(point_index: int, ebno_db: float, cfg: ModemConfig, min_errors: int,
               max_bits: int, seed: int, batch_frames: int) -> BerPoint:
    k = cfg.bits_per_symbol
    bits_per_frame = FRAME_SYMBOLS * k
    sent = errors = ppm_sent = ppm_errors = 0
    batch = 0
    while errors < min_errors and sent < max_bits:
        n_frames = min(batch_frames, -(-(max_bits - sent) // bits_per_frame))
        rng = np.random.default_rng(_batch_seed(seed, point_index, batch))
        i_bits = rng.integers(0, 2, (n_frames, FRAME_SYMBOLS), dtype=np.uint8)
        q_bits = rng.integers(0, 2, (n_frames, bits_per_frame), dtype=np.uint8)
        clean = modulate(i_bits, q_bits, cfg)
        noisy = apply_awgn(clean, AwgnChannel(ebno_db, int(rng.integers(0, 2**63))), k)
        q_hat = psk_demodulate(noisy, cfg, preamble=False)
        i_hat = ppm_demodulate(noisy, cfg, preamble=False)
        errors += int(np.count_nonzero(q_hat != q_bits))
        sent += q_bits.size
        ppm_errors += int(np.count_nonzero(i_hat != i_bits))
        ppm_sent += i_bits.size
        batch += 1
    theory = theoretical_psk_ber(cfg.psk_order, ebno_db, cfg.mapping, cfg.encoding)
    return BerPoint(ebno_db, cfg.psk_order, sent, errors, theory, ppm_sent, ppm_errors)


def ber_sweep(order: int, ebno_grid, min_errors: int = 100, max_bits: int = 10_000_000,
              seed: int = 0, encoding: str = "absolute", mapping: str = "gray",
              samples_per_symbol: int = 10, batch_frames: int = 512,
              workers: int = 1) -> list[BerPoint]:
    """Monte-Carlo BER of the quadrature overlay (and of the PPM layer) per Eb/N0.

    Each grid point stops after ``min_errors`` quadrature bit errors or
    ``max_bits`` bits.  Every batch draws from its own seed derived from
    ``(seed, point, batch)``, so results do not depend on ``workers``.
    """
    grid = [float(x) for x in ebno_grid]
    if not grid:
        raise ValueError("empty Eb/N0 grid")
    cfg = ModemConfig(samples_per_symbol, order, encoding, mapping)
    args = [(i, e, cfg, min_errors, int(max_bits), seed, batch_frames) for i, e in enumerate(grid)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda a: _run_point(*a), args))
    return [_run_point(*a) for a in args]
