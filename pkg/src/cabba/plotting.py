"""Figure rendering for the report paths of the CLI (headless Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

# fixed metadata keeps PNG bytes stable between runs
_PNG_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def ber_figure(points, path):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for order in sorted({p.order for p in points}):
        pts = sorted((p for p in points if p.order == order), key=lambda p: p.ebno_db)
        x = [p.ebno_db for p in pts]
        sim = [p.ber if p.bit_errors else float("nan") for p in pts]
        ax.semilogy(x, sim, "o-", label=f"D{order}PSK simulated")
        ax.semilogy(x, [p.theory_ber for p in pts], "--", label=f"{order}PSK theory")
    ax.axhline(1e-6, color="grey", lw=0.8, ls=":")
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, path)


def cor1_figure(rows, path):
    """Mean ADS-B occupancy per hour with confidence bars."""
    fig, ax = plt.subplots(figsize=(7, 4))
    hours = [r.hour for r in rows]
    mean = [100 * r.gamma_mean for r in rows]
    err = [[100 * (r.gamma_mean - r.gamma_lo) for r in rows],
           [100 * (r.gamma_hi - r.gamma_mean) for r in rows]]
    ax.errorbar(hours, mean, yerr=err, fmt="o-", capsize=3)
    ax.set_xlabel("hour (UTC)")
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_ylabel("COR (%)")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def cor2_figure(hours, series: dict, path):
    """Per-hour occupancy for ADS-B and each CABBA scenario."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, values in series.items():
        ax.plot(hours, [100 * v for v in values], "o-", label=label, ms=3)
    ax.set_xlabel("hour (UTC)")
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_ylabel("COR (%)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    _save(fig, path)
