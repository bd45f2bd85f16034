"""End-to-end acceptance checks.

Each check prints one ``PASS``/``FAIL`` line.  Run with ``pytest -s`` to see
them, or execute this file directly for the bare report.
"""
import itertools
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cabba import airspace  # noqa: E402
from cabba.airspace import (  # noqa: E402
    SCENARIOS, TrafficCapture, cor_cabba, expected_uncertainty_delay, los_range_nm,
    mutual_los_range_nm, safety_table, sat_overhead_bits_per_min,
)
from cabba.channel import ber_sweep, theoretical_psk_ber  # noqa: E402
from cabba.cli import run  # noqa: E402
from cabba.frames import FrameC, decode_frame, encode_frame  # noqa: E402
from cabba.modem import ModemConfig, demodulate, modulate, ppm_demodulate, ppm_modulate  # noqa: E402
from cabba.pki import CertAuthority  # noqa: E402
from cabba.receiver import ReceiverContext  # noqa: E402
from cabba.rs import rs_54_34  # noqa: E402
from cabba.sim import Sender, random_frame  # noqa: E402
from cabba.tesla import TeslaConfig, generate_chain, verify_pledge  # noqa: E402

from conftest import CHAIN, ICAO  # noqa: E402
from test_airspace import REFERENCE_ECDF, hand_cor, steady_capture  # noqa: E402
from test_receiver import (  # noqa: E402
    _pool, _two_chain_frames, check_monotone, check_no_false_authentication, run_ordering,
)


def _actors():
    ca = CertAuthority.from_seed(b"test-ca")
    plane = Sender.create(ca, ICAO, b"plane", CHAIN)
    spoofer = Sender.create(CertAuthority.from_seed(b"rogue-ca"), ICAO, b"spoofer", CHAIN)
    return ca, plane, spoofer


def report(label, check):
    t0 = time.perf_counter()
    try:
        detail = check()
    except AssertionError as exc:
        print(f"FAIL {label}: {exc}")
        raise
    print(f"PASS {label}: {detail} ({time.perf_counter() - t0:.1f} s)")


# -- 1: protocol round trip --

def check_round_trip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    cfg = ModemConfig()
    for kind in ("A", "B1", "B2", "C"):
        frames = [random_frame(kind, rng) for _ in range(1000)]
        packets = [encode_frame(f) for f in frames]
        i_bits = np.stack([p[0].bits for p in packets])
        q_bits = np.stack([p[1].bits for p in packets])
        signal = modulate(i_bits, q_bits, cfg)
        i_hat, q_hat = demodulate(signal, cfg, q_bits.shape[1])
        for k, f in enumerate(frames):
            assert decode_frame(i_hat.bits[k], q_hat.bits[k]) == f, f"{kind} frame {k} differs"
    elapsed = time.perf_counter() - t0
    assert elapsed < 60, f"took {elapsed:.1f} s"
    return "4000 frames identical after encode/modulate/demodulate/decode"


# -- 2: legacy receiver unaffected --

def check_ppm_compat():
    rng = np.random.default_rng(7)
    worst = 0.0
    errors = 0
    for order in (8, 16):
        cfg = ModemConfig(psk_order=order)
        frames = [random_frame("A", rng) for _ in range(500)]
        i_bits = np.stack([encode_frame(f)[0].bits for f in frames])
        q_bits = rng.integers(0, 2, (500, 112 * cfg.bits_per_symbol), dtype=np.uint8)
        signal = modulate(i_bits, q_bits, cfg)
        errors += int(np.count_nonzero(ppm_demodulate(signal, cfg) != i_bits))
        worst = max(worst, float(np.max(np.abs(np.abs(signal.samples) - ppm_modulate(i_bits, cfg)))))
    assert errors == 0, f"{errors} in-phase bit errors"
    assert worst <= 1e-12, f"envelope deviates by {worst:.3g}"
    return f"1000 FrameA trials, 0 bit errors, max envelope deviation {worst:.1e}"


# -- 3: BER against theory --

def check_ber():
    grid = [6.0, 8.0, 10.0, 12.0]
    lines = []
    d8 = ber_sweep(8, grid, min_errors=100, seed=1, encoding="absolute", mapping="gray")
    for p in d8:
        ratio = p.ber / p.theory_ber
        lines.append(f"{p.ebno_db:g}dB ratio {ratio:.2f}")
        assert p.bit_errors >= 100, f"only {p.bit_errors} errors at {p.ebno_db} dB"
        assert 1 / 1.5 <= ratio <= 1.5, f"8PSK at {p.ebno_db} dB is {ratio:.2f}x theory"
    diff = ber_sweep(8, grid, min_errors=100, seed=2, encoding="differential", mapping="gray")
    for p in diff:
        ratio = p.ber / p.theory_ber
        assert p.theory_ber == pytest.approx(2 * theoretical_psk_ber(8, p.ebno_db))
        assert 1 / 1.5 <= ratio <= 1.5, f"D8PSK at {p.ebno_db} dB is {ratio:.2f}x adjusted theory"
    d16 = ber_sweep(16, grid, min_errors=100, seed=3, encoding="differential", mapping="gray")
    for a, b in zip(diff, d16):
        assert b.ber > a.ber, f"D16PSK not worse at {a.ebno_db} dB"
    hi = ber_sweep(8, [15.0], min_errors=1, max_bits=1_000_000, seed=4,
                   encoding="differential", mapping="gray")[0]
    assert hi.bits_sent >= 1_000_000 and hi.bit_errors == 0, \
        f"{hi.bit_errors} errors in {hi.bits_sent} bits at 15 dB"
    return "; ".join(lines) + f"; D16>D8 everywhere; 15dB 0/{hi.bits_sent}"


# -- 4: RS(54,34) --

def check_rs():
    rs = rs_54_34()
    rng = random.Random(54)
    parity_bits = (rs.n - rs.k) * 6
    assert parity_bits == 120
    for _ in range(2000):
        msg = [rng.randrange(64) for _ in range(34)]
        word = rs.encode(msg)
        bad = list(word)
        for pos in rng.sample(range(54), rng.randint(1, 10)):
            bad[pos] ^= rng.randrange(1, 64)
        data, _ = rs.decode(bad)
        assert list(data) == msg
    frames_rng = np.random.default_rng(4)
    for kind in ("A", "B1", "B2", "C"):
        for _ in range(50):
            f = random_frame(kind, frames_rng)
            i_pkt, q_pkt = encode_frame(f)
            q = q_pkt.bits.copy()
            for s in rng.sample(range(54), 10):
                q[12 + 6 * s + rng.randrange(6)] ^= 1
            assert decode_frame(i_pkt, q) == f
    return "2000 codewords and 200 frames repaired with up to 10 bad symbols; 120 parity bits"


# -- 5: TESLA chains and same-origin attribution --

def check_tesla():
    t0 = time.perf_counter()
    cfg = TeslaConfig(chain_length=100)
    rng = random.Random(5)
    for n in range(100):
        chain = generate_chain(n.to_bytes(4, "big"), cfg)
        i = rng.randint(1, cfg.chain_length)
        assert verify_pledge(chain.key(i), i, chain.pledge, cfg)
        assert not verify_pledge(chain.key(i), i - 1, chain.pledge, cfg)
        forged = bytes([chain.key(i)[0] ^ 1]) + chain.key(i)[1:]
        assert not verify_pledge(forged, i, chain.pledge, cfg)
    ca, plane, spoofer = _actors()
    items = _two_chain_frames(plane, spoofer)
    count = 0
    for order in itertools.permutations(range(len(items))):
        ctx, owner = run_ordering(ca, items, order)
        check_no_false_authentication(ctx, owner)
        count += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 60, f"took {elapsed:.1f} s"
    return f"100 chains; {count} two-chain interleavings without false authentication"


# -- 6: state machine --

def check_state_machine():
    ca, plane, spoofer = _actors()

    def states(*steps):
        ctx = ReceiverContext(ICAO, ca.public, config=CHAIN)
        out = []
        for frame, rx in steps:
            ctx.ingest(frame, rx)
            out.append(ctx.state)
        return out

    assert states((plane.message(1, 0), 1)) == ["S0"]
    assert states((plane.b1(1), 2)) == ["S1"]
    assert states((plane.b2(1), 2)) == ["S2"]
    assert states((plane.c(), 1)) == ["S3"]
    assert states((plane.b2(1), 2), (plane.c(), 2)) == ["S2", "S4"]
    assert states((plane.c(), 1), (plane.b2(1), 2)) == ["S3", "S4"]
    assert states((plane.b1(1), 2), (plane.b2(2), 3)) == ["S1", "S2"]
    assert states((spoofer.c(), 1)) == ["S0"]
    forged = FrameC(ICAO, spoofer.identity.public, plane.identity.cert_signature)
    assert states((forged, 1)) == ["S0"]
    pool = _pool(plane, spoofer)
    rng = random.Random(6)
    for _ in range(10_000):
        check_monotone(ca, pool, rng, rng.randint(1, 10))
    return "A no-op, B1->S1, B2->S2, C->S3, S2+C->S4, S3+B2->S4; 10000 monotone orderings"


# -- 7: uncertainty delays --

def check_delay_tables():
    s4 = SCENARIOS["s4"]
    fixture = {"TA": (0.089, 3.0, 18.1), "RA": (0.064, 2.9, 17.2), "Tower": (0.028, 3.0, 16.3),
               "Terminal": (0.222, 4.1, 25.0), "ACC": (0.833, 14.0, 82.1)}
    got = []
    for name, (p, want_b, want_c) in fixture.items():
        b = expected_uncertainty_delay(p, s4.T_B1)
        c = expected_uncertainty_delay(p, s4.T_C)
        assert abs(b - want_b) <= 0.5 and abs(c - want_c) <= 0.5, f"{name}: {b:.2f}/{c:.2f}"
        got.append(f"{name} {b:.1f}/{c:.1f}")
    rows = safety_table("tcas", s4, REFERENCE_ECDF) + safety_table("atc", s4, REFERENCE_ECDF)
    for r in rows:
        p, want_b, want_c = fixture[r.name]
        assert abs(r.delay_b1_s - want_b) <= 0.5 and abs(r.delay_c_s - want_c) <= 0.5, r.name
    return ", ".join(got)


# -- 8: line of sight --

def check_los():
    vals = [los_range_nm(3000), los_range_nm(12500), mutual_los_range_nm(35000, 35000),
            mutual_los_range_nm(3000, 3000)]
    for got, want in zip(vals, (58.0, 118.5, 396.6, 116.1)):
        assert abs(got - want) <= 0.5, f"{got:.2f} vs {want}"
    return " ".join(f"{v:.1f}" for v in vals) + " NM"


# -- 9: satellite comparison --

def check_sat():
    bits = sat_overhead_bits_per_min(6.2, 5, 30)
    assert bits == pytest.approx(14176)
    assert airspace.SAT_DOCUMENTED_BITS_PER_MIN == 14752
    assert airspace.SAT_DOCUMENTED_BPS == pytest.approx(airspace.SAT_DOCUMENTED_BITS_PER_MIN / 60, abs=0.1)
    assert airspace.SAT_DOCUMENTED_BPS / airspace.ADSB_BPS == pytest.approx(airspace.SAT_DOCUMENTED_INCREASE, abs=0.01)
    code, out = run(["sat"])
    assert code == 0 and "note:" in out
    return f"formula {bits:.0f} bits/min; recorded 14752, 245.8 bps, 35% (discrepancy noted)"


# -- 10: channel occupancy --

def check_cor():
    cap = steady_capture()
    worst = 0.0
    for sc in SCENARIOS.values():
        res = cor_cabba(cap, 60.0, sc)
        gamma, frac = hand_cor(res.n_A, 10, sc)
        worst = max(worst, abs(res.gamma_cabba / gamma - 1), abs(res.packet_overhead_frac / frac - 1))
    assert worst <= 1e-9, f"relative error {worst:.2e}"
    extra = [cor_cabba(cap, 60.0, sc).gamma_increase for sc in SCENARIOS.values()]
    assert extra[0] > extra[1] > extra[2] > extra[3], "scenario ordering broken"
    rng = np.random.default_rng(10)
    recs = [(float(t), int(a)) for a in range(40)
            for t in np.sort(rng.uniform(0, 600, rng.integers(100, 4000)))]
    rand_cap = TrafficCapture.from_records(recs)
    extra = [cor_cabba(rand_cap, 300.0, sc).gamma_increase for sc in SCENARIOS.values()]
    assert extra[0] > extra[1] > extra[2] > extra[3], "ordering broken on random capture"
    return f"hand oracle rel err {worst:.1e}; S1>S2>S3>S4 (absolute capture figures not asserted)"


# -- 11: CLI determinism --

def check_determinism(tmp_path):
    ev = tmp_path / "e.ev"
    run(["scenario", "spoofer", "--out", str(ev)])
    cap = tmp_path / "cap.csv"
    cap.write_text("timestamp,icao24\n" + "".join(
        f"{t:.3f},{0x100 + a:06x}\n" for a in range(8) for t in np.arange(0.01 * a, 3600, 0.4)))
    commands = [
        ["--seed", "5", "keychain", "gen", "--length", "50"],
        ["--seed", "5", "frame", "encode", "--random", "20"],
        ["--seed", "5", "--format", "csv", "ber", "--ebno", "6,8", "--min-errors", "20",
         "--max-bits", "5e4"],
        ["--seed", "5", "scenario", "c-first"],
        ["--seed", "5", "--format", "json", "rxsim", "--events", str(ev)],
        ["--seed", "5", "--format", "csv", "cor", "--capture", str(cap), "--scenario", "s2"],
        ["--seed", "5", "--format", "json", "safety", "--domain", "atc"],
        ["--seed", "5", "sat"],
    ]
    for argv in commands:
        first, second = run(argv), run(argv)
        assert first == second, f"{' '.join(argv[2:4])} differs between runs"
        assert first[0] == 0, f"{' '.join(argv)} exited {first[0]}"
    reports = []
    for name in ("r1", "r2"):
        run(["--seed", "5", "cor", "--capture", str(cap), "--report", str(tmp_path / name)])
        reports.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    assert reports[0] == reports[1], "report files differ"
    frames = tmp_path / "f.txt"
    frames.write_text(run(["--seed", "5", "frame", "encode", "--random", "6"])[1])
    blobs = []
    for name in ("a.iq", "b.iq"):
        run(["modem", "tx", "--in", str(frames), "--out", str(tmp_path / name)])
        blobs.append((tmp_path / name).read_bytes())
    assert blobs[0] == blobs[1], "modem output differs"
    return f"{len(commands) + 2} invocations byte-identical on repeat"


CHECKS = [
    ("1 protocol round trip", check_round_trip),
    ("2 legacy PPM compatibility", check_ppm_compat),
    ("3 BER vs theory", check_ber),
    ("4 RS(54,34) correction", check_rs),
    ("5 TESLA and same-origin", check_tesla),
    ("6 state machine", check_state_machine),
    ("7 uncertainty delay tables", check_delay_tables),
    ("8 line of sight", check_los),
    ("9 SAT overhead", check_sat),
    ("10 COR engine", check_cor),
]


@pytest.mark.parametrize("label, check", CHECKS, ids=[c[0].split()[0] for c in CHECKS])
def test_acceptance(label, check):
    report(label, check)


def test_acceptance_determinism(tmp_path):
    report("11 CLI determinism", lambda: check_determinism(tmp_path))


if __name__ == "__main__":
    import tempfile

    failed = 0
    for label, check in [*CHECKS, ("11 CLI determinism", None)]:
        try:
            if check is None:
                with tempfile.TemporaryDirectory() as d:
                    report(label, lambda: check_determinism(Path(d)))
            else:
                report(label, check)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
