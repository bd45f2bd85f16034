"""Operational viability: channel occupancy, key-distribution overhead, delays, LOS.

Captures are CSV files with a ``timestamp,icao24`` header, one row per
received ADS-B message.  Occupancy ``gamma`` is the fraction of a sampling
window the channel is busy, counting a fixed airtime per packet.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ZeroValidRows
from .frames import frame_airtime_us

ADSB_AIRTIME_S = frame_airtime_us("A") * 1e-6
DEFAULT_WINDOW_S = 30.0


@dataclass(frozen=True)
class TrafficCapture:
    timestamps: np.ndarray
    icaos: np.ndarray
    window_s: float = DEFAULT_WINDOW_S
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def records(self) -> list[tuple[float, int]]:
        return list(zip(self.timestamps.tolist(), self.icaos.tolist()))

    @property
    def span(self) -> tuple[float, float]:
        return float(self.timestamps[0]), float(self.timestamps[-1])

    @classmethod
    def from_records(cls, records, window_s: float = DEFAULT_WINDOW_S) -> TrafficCapture:
        recs = sorted(records, key=lambda r: r[0])
        if not recs:
            raise ZeroValidRows("capture has no valid rows")
        ts = np.array([float(r[0]) for r in recs])
        ic = np.array([int(r[1]) for r in recs], dtype=np.int64)
        return cls(ts, ic, window_s)

    def window(self, start: float, length: float) -> tuple[int, int]:
        """Index range of records with ``start <= t < start + length``."""
        lo = int(np.searchsorted(self.timestamps, start, "left"))
        hi = int(np.searchsorted(self.timestamps, start + length, "left"))
        return lo, hi

    def distinct_aircraft(self, start: float, length: float) -> int:
        lo, hi = self.window(start, length)
        return int(np.unique(self.icaos[lo:hi]).size)


def _parse_icao(text: str) -> int:
    value = int(text.strip(), 16)
    if not 0 <= value < 1 << 24:
        raise ValueError("icao24 out of range")
    return value


def ingest_capture(source, window_s: float = DEFAULT_WINDOW_S) -> TrafficCapture:
    """Read a ``timestamp,icao24`` CSV from a path or text stream.

    Malformed rows are skipped and counted in ``skipped``.  Raises
    :class:`ZeroValidRows` if nothing usable remains.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise ZeroValidRows("capture is empty")
    cols = [h.strip().lower() for h in header]
    try:
        ti, ii = cols.index("timestamp"), cols.index("icao24")
    except ValueError:
        raise ZeroValidRows("capture lacks timestamp,icao24 columns") from None
    records, skipped = [], 0
    for row in reader:
        if not row or not any(c.strip() for c in row):
            continue
        try:
            t = float(row[ti])
            if not math.isfinite(t):
                raise ValueError
            records.append((t, _parse_icao(row[ii])))
        except (ValueError, IndexError):
            skipped += 1
    if not records:
        raise ZeroValidRows(f"capture has no valid rows ({skipped} malformed)")
    cap = TrafficCapture.from_records(records, window_s)
    return TrafficCapture(cap.timestamps, cap.icaos, window_s, skipped)


# -- channel occupancy --

@dataclass(frozen=True)
class ScenarioParams:
    T_B1: float
    T_B2: float
    T_C: float
    name: str = "custom"

    def __post_init__(self):
        if min(self.T_B1, self.T_B2, self.T_C) <= 0:
            raise ValueError("transmission periods must be positive")
        k = self.T_B2 / self.T_B1
        if abs(k - round(k)) > 1e-9 or round(k) < 1:
            raise ValueError("T_B2 must be a positive multiple of T_B1")

    @classmethod
    def from_json(cls, text: str) -> ScenarioParams:
        d = json.loads(text)
        return cls(float(d["T_B1"]), float(d["T_B2"]), float(d["T_C"]), str(d.get("name", "custom")))


SCENARIOS = {
    "s1": ScenarioParams(5, 5, 5, "s1"),
    "s2": ScenarioParams(5, 10, 15, "s2"),
    "s3": ScenarioParams(5, 10, 20, "s3"),
    "s4": ScenarioParams(5, 15, 30, "s4"),
}


def load_scenario(name: str) -> ScenarioParams:
    """``s1``..``s4`` or the path of a JSON file with T_B1, T_B2 and T_C."""
    if name.lower() in SCENARIOS:
        return SCENARIOS[name.lower()]
    with open(name) as fh:
        return ScenarioParams.from_json(fh.read())


@dataclass(frozen=True)
class CorResult:
    gamma_adsb: float
    gamma_cabba: float
    packet_overhead_frac: float
    n_A: int
    n_B1: float
    n_B2: float
    n_C: float
    breakdown_s: dict = field(default_factory=dict)

    @property
    def gamma_increase(self) -> float:
        return self.gamma_cabba - self.gamma_adsb


def cor_adsb(capture: TrafficCapture, start: float, window: float = DEFAULT_WINDOW_S) -> float:
    lo, hi = capture.window(start, window)
    return (hi - lo) * ADSB_AIRTIME_S / window


def cor_cabba(capture: TrafficCapture, start: float, scenario: ScenarioParams,
              window: float = DEFAULT_WINDOW_S) -> CorResult:
    """Occupancy of the window ``[start, start + window)`` if every aircraft ran CABBA.

    Key and certificate counts come from the number of distinct aircraft seen
    in the ``T`` seconds before ``start``, one packet per aircraft per period
    scaled to the window length.  A B2 replaces the B1 of its interval, so
    B1 packets go out at ``1/T_B1 - 1/T_B2`` per aircraft.
    """
    lo, hi = capture.window(start, window)
    n_a = hi - lo
    x_b1 = capture.distinct_aircraft(start - scenario.T_B1, scenario.T_B1)
    x_b2 = capture.distinct_aircraft(start - scenario.T_B2, scenario.T_B2)
    x_c = capture.distinct_aircraft(start - scenario.T_C, scenario.T_C)
    n_b1 = x_b1 * window * (1 / scenario.T_B1 - 1 / scenario.T_B2)
    n_b2 = x_b2 * window / scenario.T_B2
    n_c = x_c * window / scenario.T_C
    busy = {
        "A": n_a * frame_airtime_us("A") * 1e-6,
        "B1": n_b1 * frame_airtime_us("B1") * 1e-6,
        "B2": n_b2 * frame_airtime_us("B2") * 1e-6,
        "C": n_c * frame_airtime_us("C") * 1e-6,
    }
    extra = n_b1 + n_b2 + n_c
    total = n_a + extra
    return CorResult(
        gamma_adsb=busy["A"] / window,
        gamma_cabba=sum(busy.values()) / window,
        packet_overhead_frac=extra / total if total else 0.0,
        n_A=n_a, n_B1=n_b1, n_B2=n_b2, n_C=n_c, breakdown_s=busy,
    )


@dataclass(frozen=True)
class HourlyCor:
    hour: int
    gamma_mean: float
    gamma_lo: float
    gamma_hi: float
    samples: tuple


def hourly_windows(hour_start: float, samples: int = 6, window: float = DEFAULT_WINDOW_S) -> list[float]:
    """Window starts spread evenly over the hour."""
    return [hour_start + k * 3600.0 / samples for k in range(samples)]


def mean_ci(values, confidence: float = 0.95) -> tuple[float, float, float]:
    """Mean and Student-t confidence bounds."""
    v = np.asarray(values, dtype=float)
    m = float(v.mean())
    if v.size < 2:
        return m, m, m
    sem = float(v.std(ddof=1)) / math.sqrt(v.size)
    half = float(stats.t.ppf(0.5 + confidence / 2, v.size - 1)) * sem
    return m, m - half, m + half


def hours_in(capture: TrafficCapture) -> list[int]:
    lo, hi = capture.span
    return list(range(int(lo // 3600), int(hi // 3600) + 1))


def hourly_cor(capture: TrafficCapture, scenario: ScenarioParams | None = None,
               samples: int = 6, window: float = DEFAULT_WINDOW_S) -> list[HourlyCor]:
    """Per-hour mean occupancy with a 95% confidence interval.

    ``scenario=None`` gives plain ADS-B occupancy.
    """
    out = []
    for h in hours_in(capture):
        starts = hourly_windows(h * 3600.0, samples, window)
        if scenario is None:
            vals = [cor_adsb(capture, s, window) for s in starts]
        else:
            vals = [cor_cabba(capture, s, scenario, window).gamma_cabba for s in starts]
        out.append(HourlyCor(h % 24, *mean_ci(vals), tuple(vals)))
    return out


# -- SAT comparison --

SAT_DOCUMENTED_BITS_PER_MIN = 14752
SAT_DOCUMENTED_BPS = 245.8
ADSB_BPS = 694.4
SAT_DOCUMENTED_INCREASE = 0.35


def sat_overhead_bits_per_min(f_a: float, t_b: float, t_c: float) -> float:
    """Extra bits per aircraft per minute: 24-bit MAC per message plus keys and certificates."""
    if f_a < 0 or t_b <= 0 or t_c <= 0:
        raise ValueError("parameters must be positive")
    return f_a * 60 * 24 + (60 / t_b) * 184 + (60 / t_c) * 1520


# -- uncertainty delay and line of sight --

def expected_uncertainty_delay(p: float, T: float) -> float:
    """Expected wait until a key arrives when each copy is lost with probability ``p``."""
    if not 0 <= p < 1:
        raise ValueError("p must lie in [0, 1)")
    if T <= 0:
        raise ValueError("T must be positive")
    return T / 2 * (1 + 2 * p + 4 * p * p)


def los_range_nm(altitude_ft: float) -> float:
    if altitude_ft < 0:
        raise ValueError("altitude must be non-negative")
    return 1.06 * math.sqrt(altitude_ft)


def mutual_los_range_nm(alt1_ft: float, alt2_ft: float) -> float:
    return los_range_nm(alt1_ft) + los_range_nm(alt2_ft)


NM_KM = 1.852


@dataclass(frozen=True)
class SafetyRow:
    domain: str
    name: str
    radius_nm: float
    p: float
    delay_b1_s: float
    delay_c_s: float
    los_nm: float
    los_min: float
    budget_s: str


# name, max radius NM, LOS range NM, speed kt, reaction or update budget
_TCAS_ROWS = (
    ("TA", 16.0, (3000, 3000), (35000, 35000), "20-48"),
    ("RA", 11.6, (3000, 3000), (35000, 35000), "15-35"),
)
_ATC_ROWS = (
    ("Tower", 5.0, lambda: los_range_nm(3000), 250.0, "10"),
    ("Terminal", 40.0, lambda: los_range_nm(12500), 250.0, "10"),
    ("ACC", 150.0, lambda: 140.0, 450.0, "10"),
)


def interpolate_loss(ecdf, distance_km: float) -> float:
    """Loss probability at ``distance_km`` by linear interpolation, clamped at the ends."""
    pts = sorted((float(d), float(p)) for d, p in ecdf)
    if not pts:
        raise ValueError("loss ECDF is empty")
    ds = [d for d, _ in pts]
    ps = [p for _, p in pts]
    if any(b < a for a, b in zip(ps, ps[1:])) or len(set(ds)) != len(ds):
        raise ValueError("loss ECDF must be monotone in distance")
    if not all(0 <= p < 1 for p in ps):
        raise ValueError("loss probabilities must lie in [0, 1)")
    if distance_km <= ds[0]:
        return ps[0]
    if distance_km >= ds[-1]:
        return ps[-1]
    i = bisect_left(ds, distance_km)
    d0, d1, p0, p1 = ds[i - 1], ds[i], ps[i - 1], ps[i]
    return p0 + (p1 - p0) * (distance_km - d0) / (d1 - d0)


def load_ecdf(source) -> list[tuple[float, float]]:
    """Read ``distance_km,p`` rows (header optional)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    out = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].strip().startswith("#"):
            continue
        try:
            out.append((float(row[0]), float(row[1])))
        except ValueError:
            if out:
                raise
            continue  # header
    if not out:
        raise ValueError("loss ECDF is empty")
    return out


def safety_table(domain: str, scenario: ScenarioParams, loss_ecdf) -> list[SafetyRow]:
    """TCAS or ATC rows: loss probability at the sector edge, expected delays, LOS lead time."""
    rows = []
    if domain == "tcas":
        for name, radius, low_alt, high_alt, budget in _TCAS_ROWS:
            # closure 500 kt in terminal areas, 1200 kt oceanic
            lo = mutual_los_range_nm(*low_alt) / 500 * 60
            hi = mutual_los_range_nm(*high_alt) / 1200 * 60
            p = interpolate_loss(loss_ecdf, radius * NM_KM)
            rows.append(SafetyRow("tcas", name, radius, p,
                                  expected_uncertainty_delay(p, scenario.T_B1),
                                  expected_uncertainty_delay(p, scenario.T_C),
                                  mutual_los_range_nm(*low_alt), min(lo, hi), budget))
    elif domain == "atc":
        for name, radius, los, speed, budget in _ATC_ROWS:
            p = interpolate_loss(loss_ecdf, radius * NM_KM)
            rng = los()
            rows.append(SafetyRow("atc", name, radius, p,
                                  expected_uncertainty_delay(p, scenario.T_B1),
                                  expected_uncertainty_delay(p, scenario.T_C),
                                  rng, rng / speed * 60, budget))
    else:
        raise ValueError(f"unknown domain {domain!r}")
    return rows


def bundled_ecdf() -> list[tuple[float, float]]:
    from importlib.resources import files
    return load_ecdf(io.StringIO(files("cabba").joinpath("data/loss_ecdf.csv").read_text()))
