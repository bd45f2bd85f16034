"""Command-line entry point: ``cabba <subcommand> ...``.

Exit codes: 0 success, 1 verification or decoding failure, 2 usage or input
format error.  Output never depends on wall-clock time; floats are printed
with six significant digits.

File formats
  key file        one 128-bit key per line as hex, K_N first, pledge K_0 last
  frame lines     ``TYPE I:<hex> Q:<hex>`` (TYPE is A, B1, B2 or C)
  frame records   JSON lines, e.g. {"type": "B1", "icao": "4840d6", "interval": 7, "key": "<hex>"}
  I/Q samples     float32 little-endian I,Q pairs plus ``<file>.hdr`` holding ``#sr=<Hz>``
  event script    ``#ca=``/``#interval_s=``/``#mac_len=``/``#scheme=`` headers, then ``<t> <frame line>``
  capture         CSV with ``timestamp,icao24`` columns
  loss ECDF       CSV ``distance_km,p``, p non-decreasing in distance
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import airspace, channel, frames, modem, sim, tesla
from .errors import CabbaError, IndexOutOfRange, InvalidConfig, InvalidOrder

USAGE_ERRORS = (InvalidConfig, InvalidOrder, IndexOutOfRange)


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


# -- output --

def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.6g}")
    return x


def _fmt(x) -> str:
    x = _num(x)
    if isinstance(x, float):
        return f"{x:.6g}"
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    return str(x)


def emit(rows: list[dict], fmt: str, out, columns: list[str] | None = None) -> None:
    """Write records as JSON lines, CSV with a header, or ``key=value`` text."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    if fmt == "json":
        for r in rows:
            out.write(json.dumps({k: _num(r[k]) for k in columns if k in r}, sort_keys=False) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(k)) for k in columns])
    else:
        for r in rows:
            out.write(" ".join(f"{k}={_fmt(r.get(k))}" for k in columns) + "\n")


def _read_text(path: str | None) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    return Path(path).read_text()


def _write_text(path: str | None, text: str, out) -> None:
    if path in (None, "-"):
        out.write(text)
    else:
        Path(path).write_text(text)


# -- keychain --

def cmd_keychain_gen(args, out):
    if args.seed_hex is not None:
        try:
            seed = bytes.fromhex(args.seed_hex)
        except ValueError:
            raise UsageError("--seed-hex is not hex") from None
    else:
        seed = args.seed.to_bytes(8, "big")
    cfg = tesla.TeslaConfig(chain_length=args.length)
    chain = tesla.generate_chain(seed, cfg)
    if args.out:
        Path(args.out).write_text(chain.dumps())
        emit([{"length": chain.length, "pledge": chain.pledge.hex(), "out": args.out}], args.format, out)
    else:
        out.write(chain.dumps())


def cmd_keychain_verify(args, out):
    chain = tesla.KeyChain.loads(_read_text(args.infile))
    key = chain.key(args.index)
    ok = tesla.verify_pledge(key, args.index, chain.pledge,
                             tesla.TeslaConfig(chain_length=max(1, chain.length)))
    emit([{"length": chain.length, "index": args.index, "key": key.hex(),
           "pledge": chain.pledge.hex(), "valid": ok}], args.format, out)
    if not ok:
        raise CheckFailed("key does not hash to the pledge")


# -- frames --

def _random_frames(args) -> list:
    rng = np.random.default_rng(args.seed)
    kinds = [k.strip() for k in args.types.split(",")]
    for k in kinds:
        if k not in frames.KINDS:
            raise UsageError(f"unknown frame type {k!r}")
    return [sim.random_frame(kinds[n % len(kinds)], rng, args.mac_len) for n in range(args.random)]


def _read_records(text: str) -> list:
    out = []
    for line in text.splitlines():
        if line.strip():
            try:
                out.append(frames.frame_from_record(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise UsageError(f"bad JSON record: {exc}") from None
    return out


def cmd_frame_encode(args, out):
    items = _random_frames(args) if args.random else _read_records(_read_text(args.infile))
    lines = [frames.encode_line(f) for f in items]
    if args.format == "json":
        emit([{"type": f.kind, "line": ln} for f, ln in zip(items, lines)], "json", out)
    else:
        _write_text(args.out, "".join(ln + "\n" for ln in lines), out)


def _frame_lines(text: str) -> list[str]:
    """Frame lines, also accepting the ``{"line": ...}`` objects of ``--format json``."""
    out = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if ln.startswith("{"):
            try:
                ln = json.loads(ln)["line"]
            except (ValueError, KeyError, TypeError):
                raise ValueError(f"not a frame line: {ln[:40]!r}") from None
        out.append(ln)
    return out


def cmd_frame_decode(args, out):
    decoded = [frames.decode_line(ln, args.mac_len) for ln in _frame_lines(_read_text(args.infile))]
    recs = [frames.frame_to_record(f) for f in decoded]
    if args.format == "json":
        for r in recs:
            out.write(json.dumps(r) + "\n")
    else:
        cols = ["type", "icao", "interval", "seq", "mac_len", "message", "mac", "key",
                "public_key", "signature"]
        used = [c for c in cols if any(c in r for r in recs)]
        emit(recs, args.format, out, used)


# -- modem --

_ENC = {"diff": "differential", "abs": "absolute", "differential": "differential",
        "absolute": "absolute"}


def _modem_config(args, sps=None) -> modem.ModemConfig:
    return modem.ModemConfig(sps or args.sps, args.order, _ENC[args.encoding], args.mapping)


def cmd_modem_tx(args, out):
    cfg = _modem_config(args)
    bursts = []
    for ln in _frame_lines(_read_text(args.infile)):
        _, i_pkt, q_pkt = frames.parse_line(ln)
        bursts.append(modem.modulate(i_pkt, q_pkt, cfg))
    if not bursts:
        raise UsageError("no frames to transmit")
    signal = modem.join_bursts(bursts)
    modem.write_iq(args.out, signal)
    emit([{"frames": len(bursts), "samples": len(signal), "sample_rate_hz": signal.sample_rate_hz,
           "out": args.out}], args.format, out)


def cmd_modem_rx(args, out):
    signal = modem.read_iq(args.infile)
    cfg = _modem_config(args, signal.samples_per_symbol)
    lines = []
    for burst in modem.split_bursts(signal):
        i_bits = modem.ppm_demodulate(burst, cfg)
        kind = frames.classify_frame(i_bits)
        i_pkt, q_pkt = modem.demodulate(burst, cfg, frames.quadrature_bits(kind))
        # decoding validates CRC and RS before the line is emitted
        frame = frames.decode_frame(i_pkt, q_pkt, args.mac_len)
        lines.append(frames.encode_line(frame))
    if args.format == "json":
        emit([{"type": ln.split()[0], "line": ln} for ln in lines], "json", out)
    else:
        _write_text(args.out, "".join(ln + "\n" for ln in lines), out)


# -- BER --

def _parse_grid(text: str) -> list[float]:
    try:
        if ":" in text:
            start, step, stop = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 9) for k in range(n)]
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad Eb/N0 grid {text!r}; use start:step:stop or a,b,c") from None


def cmd_ber(args, out):
    grid = _parse_grid(args.ebno)
    try:
        orders = [int(x) for x in args.orders.split(",")]
    except ValueError:
        raise UsageError(f"bad --orders {args.orders!r}") from None
    points = []
    for order in orders:
        points += channel.ber_sweep(order, grid, args.min_errors, int(float(args.max_bits)),
                                    args.seed, _ENC[args.encoding], args.mapping, args.sps,
                                    workers=args.workers)
    rows = [{"ebno_db": p.ebno_db, "order": p.order, "bits": p.bits_sent, "errors": p.bit_errors,
             "ber": p.ber, "theory_ber": p.theory_ber} for p in points]
    emit(rows, args.format, out, ["ebno_db", "order", "bits", "errors", "ber", "theory_ber"])
    if args.figure:
        from .plotting import ber_figure
        ber_figure(points, args.figure)


# -- receiver simulation --

def cmd_rxsim(args, out):
    script = sim.Script.loads(_read_text(args.events))
    rx = script.run()
    summary = rx.summary()
    if args.format == "json":
        out.write(rx.event_log())
        for ctx in summary:
            out.write(json.dumps(ctx, sort_keys=True) + "\n")
        return
    cols = ["t", "icao", "frame_type", "state_before", "state_after", "verdicts_changed"]
    emit(rx.events, args.format, out, cols)
    if args.format == "csv":
        out.write("\n")
    rows = []
    for ctx in summary:
        streams = {s["stream_id"]: s["verdict"] for s in ctx["streams"]}
        for m in ctx["messages"]:
            rows.append({"icao": ctx["icao"], "state": ctx["state"], **m,
                         "stream_verdict": streams.get(m["stream_id"])})
    emit(rows, args.format, out, ["icao", "state", "entry_id", "integrity", "origin", "stream_id",
                                  "stream_verdict", "duplicate", "expired"])


def cmd_scenario(args, out):
    _write_text(args.out, sim.build_scenario(args.name, args.seed).dumps(), out)


# -- airspace --

def cmd_cor(args, out):
    cap = airspace.ingest_capture(args.capture, args.window)
    scenario = airspace.load_scenario(args.scenario)
    adsb = airspace.hourly_cor(cap, None, args.samples, args.window)
    cabba = airspace.hourly_cor(cap, scenario, args.samples, args.window)
    rows = [{"hour": a.hour, "gamma_adsb": a.gamma_mean, "gamma_cabba": c.gamma_mean,
             "gamma_cabba_lo": c.gamma_lo, "gamma_cabba_hi": c.gamma_hi}
            for a, c in zip(adsb, cabba)]
    emit(rows, args.format, out)
    if cap.skipped:
        print(f"skipped {cap.skipped} malformed rows", file=sys.stderr)
    if args.report:
        write_cor_report(cap, Path(args.report), args.samples, args.window)


def write_cor_report(cap, report: Path, samples: int = 6, window: float = 30.0) -> None:
    from .plotting import cor1_figure, cor2_figure
    report.mkdir(parents=True, exist_ok=True)
    adsb = airspace.hourly_cor(cap, None, samples, window)
    with open(report / "cor1.csv", "w") as fh:
        emit([{"hour": r.hour, "gamma_mean": r.gamma_mean, "gamma_lo": r.gamma_lo,
               "gamma_hi": r.gamma_hi} for r in adsb], "csv", fh)
    series = {"ADS-B": [r.gamma_mean for r in adsb]}
    for name, sc in airspace.SCENARIOS.items():
        series[f"CABBA {name.upper()}"] = [r.gamma_mean for r in airspace.hourly_cor(cap, sc, samples, window)]
    hours = [r.hour for r in adsb]
    with open(report / "cor2.csv", "w") as fh:
        keys = list(series)
        cols = ["hour", "gamma_adsb"] + [f"gamma_{n}" for n in airspace.SCENARIOS]
        emit([{c: v for c, v in zip(cols, [h] + [series[k][i] for k in keys])}
              for i, h in enumerate(hours)], "csv", fh, cols)
    cor1_figure(adsb, report / "cor1.png")
    cor2_figure(hours, series, report / "cor2.png")


def cmd_safety(args, out):
    ecdf = airspace.load_ecdf(args.ecdf) if args.ecdf else airspace.bundled_ecdf()
    scenario = airspace.load_scenario(args.scenario)
    rows = airspace.safety_table(args.domain, scenario, ecdf)
    emit([{"name": r.name, "radius_nm": r.radius_nm, "p": r.p, "delay_b1_s": r.delay_b1_s,
           "budget_s": r.budget_s, "los_nm": r.los_nm, "los_min": r.los_min,
           "delay_c_s": r.delay_c_s} for r in rows], args.format, out)


def cmd_sat(args, out):
    bits = airspace.sat_overhead_bits_per_min(args.fa, args.tb, args.tc)
    rows = [{"quantity": "formula_bits_per_min", "value": bits},
            {"quantity": "formula_bps", "value": bits / 60},
            {"quantity": "formula_increase", "value": bits / 60 / airspace.ADSB_BPS},
            {"quantity": "documented_bits_per_min", "value": airspace.SAT_DOCUMENTED_BITS_PER_MIN},
            {"quantity": "documented_bps", "value": airspace.SAT_DOCUMENTED_BPS},
            {"quantity": "documented_increase", "value": airspace.SAT_DOCUMENTED_INCREASE}]
    emit(rows, args.format, out, ["quantity", "value"])
    if args.format != "json":
        out.write(f"note: direct evaluation gives {bits:.6g} bits/min; the documented "
                  f"{airspace.SAT_DOCUMENTED_BITS_PER_MIN} is {airspace.SAT_DOCUMENTED_BITS_PER_MIN - bits:+.6g} "
                  "from it and is the figure behind 245.8 bps and 35%\n")


# -- parser --

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cabba", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    # globals are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    kc = sub.add_parser("keychain", help="generate or verify a TESLA key chain")
    kcs = kc.add_subparsers(dest="action", required=True)
    g = kcs.add_parser("gen", parents=[common])
    g.add_argument("--seed-hex", help="chain seed as hex (default: derived from --seed)")
    g.add_argument("--length", type=int, default=tesla.DEFAULT_CONFIG.chain_length)
    g.add_argument("--out", help="key file to write (default stdout)")
    g.set_defaults(func=cmd_keychain_gen)
    v = kcs.add_parser("verify", parents=[common])
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--index", type=int, required=True)
    v.set_defaults(func=cmd_keychain_verify)

    fr = sub.add_parser("frame", help="encode or decode frame hex-dump lines")
    frs = fr.add_subparsers(dest="action", required=True)
    e = frs.add_parser("encode", parents=[common])
    e.add_argument("--in", dest="infile", help="JSON-lines frame records (default stdin)")
    e.add_argument("--random", type=int, default=0, help="emit N random frames instead")
    e.add_argument("--types", default="A,B1,B2,C", help="frame types cycled by --random")
    e.add_argument("--mac-len", type=int, default=196)
    e.add_argument("--out")
    e.set_defaults(func=cmd_frame_encode)
    d = frs.add_parser("decode", parents=[common])
    d.add_argument("--in", dest="infile")
    d.add_argument("--mac-len", type=int, default=196)
    d.set_defaults(func=cmd_frame_decode)

    md = sub.add_parser("modem", help="frame lines to I/Q samples and back")
    mds = md.add_subparsers(dest="action", required=True)
    for name, func in (("tx", cmd_modem_tx), ("rx", cmd_modem_rx)):
        m = mds.add_parser(name, parents=[common])
        m.add_argument("--in", dest="infile", required=name == "rx")
        m.add_argument("--out", required=name == "tx")
        m.add_argument("--sps", type=int, default=10, help="samples per 1 us symbol (tx only)")
        m.add_argument("--order", type=int, choices=(8, 16), default=8)
        m.add_argument("--encoding", choices=("diff", "abs"), default="diff")
        m.add_argument("--mapping", choices=("natural", "gray"), default="natural")
        m.add_argument("--mac-len", type=int, default=196)
        m.set_defaults(func=func)

    b = sub.add_parser("ber", parents=[common], help="Monte-Carlo BER of the phase overlay")
    b.add_argument("--orders", default="8,16")
    b.add_argument("--ebno", default="4:1:16", help="start:step:stop dB, or a comma list")
    b.add_argument("--min-errors", type=int, default=100)
    b.add_argument("--max-bits", default="1e7")
    b.add_argument("--encoding", choices=("diff", "abs"), default="abs")
    b.add_argument("--mapping", choices=("natural", "gray"), default="gray")
    b.add_argument("--sps", type=int, default=10)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--figure", help="write a BER plot to this path")
    b.set_defaults(func=cmd_ber)

    r = sub.add_parser("rxsim", parents=[common], help="replay an event script through the receiver")
    r.add_argument("--events", required=True)
    r.set_defaults(func=cmd_rxsim)

    s = sub.add_parser("scenario", parents=[common], help="write a demo event script")
    s.add_argument("name", choices=sim.SCENARIOS)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scenario)

    c = sub.add_parser("cor", parents=[common], help="channel occupancy from a traffic capture")
    c.add_argument("--capture", required=True)
    c.add_argument("--scenario", default="s1", help="s1..s4 or a JSON file with T_B1, T_B2, T_C")
    c.add_argument("--window", type=float, default=30.0)
    c.add_argument("--samples", type=int, default=6, help="windows per hour")
    c.add_argument("--report", help="directory for cor1/cor2 CSV and PNG files")
    c.set_defaults(func=cmd_cor)

    sf = sub.add_parser("safety", parents=[common], help="TCAS or ATC uncertainty-delay table")
    sf.add_argument("--domain", choices=("tcas", "atc"), required=True)
    sf.add_argument("--ecdf", help="distance_km,p CSV (default: bundled fixture)")
    sf.add_argument("--scenario", default="s4")
    sf.set_defaults(func=cmd_safety)

    st = sub.add_parser("sat", parents=[common], help="per-aircraft overhead of the SAT baseline")
    st.add_argument("--fa", type=float, default=6.2, help="messages per second")
    st.add_argument("--tb", type=float, default=5.0)
    st.add_argument("--tc", type=float, default=30.0)
    st.set_defaults(func=cmd_sat)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, out)
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"cabba: error: {exc}", file=sys.stderr)
        return 2
    except (CabbaError, CheckFailed) as exc:
        print(f"cabba: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, UnicodeDecodeError) as exc:
        print(f"cabba: error: {exc}", file=sys.stderr)
        return 2
    return 0


def run(argv) -> tuple[int, str]:
    """Run the CLI in-process and capture stdout."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
