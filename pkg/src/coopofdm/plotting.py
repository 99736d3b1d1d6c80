"""Figure rendering for sweep results, pole studies and flatness reports."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import FlatnessReport, SweepRow


def save_ser_curves(rows: Sequence[SweepRow], path: str) -> None:
    """SER versus Es/N0 on a log axis, one series per (scheme, relay count)."""
    fig, ax = plt.subplots(figsize=(7, 5))
    series: dict[tuple[str, int], list[SweepRow]] = {}
    for row in rows:
        series.setdefault((row.scheme, row.uavs), []).append(row)
    for (scheme, uavs), pts in sorted(series.items()):
        pts = sorted(pts, key=lambda r: r.esn0_db)
        ax.semilogy(
            [p.esn0_db for p in pts],
            [max(p.ser, 1e-12) for p in pts],
            marker="o",
            label=f"{scheme}, U={uavs}",
        )
    ax.set_xlabel("Es/N0 [dB]")
    ax.set_ylabel("SER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_pole_study(rows: Sequence[SweepRow], path: str) -> None:
    """SER versus pole modulus, one series per (order, truncation length)."""
    fig, ax = plt.subplots(figsize=(7, 5))
    series: dict[tuple[int, int], list[SweepRow]] = {}
    for row in rows:
        series.setdefault((row.apf_order, row.vchan_taps), []).append(row)
    for (order, taps), pts in sorted(series.items()):
        pts = sorted(pts, key=lambda r: r.pole_modulus)
        ax.semilogy(
            [p.pole_modulus for p in pts],
            [max(p.ser, 1e-12) for p in pts],
            marker="s",
            label=f"M={order}, Tc={taps}",
        )
    ax.set_xlabel("pole modulus")
    ax.set_ylabel("SER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_flatness(report: FlatnessReport, path: str) -> None:
    """Sampled |H(0, k)| traces, one panel line per relay count."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for uavs in sorted(report.traces):
        ax.plot(report.traces[uavs], label=f"U={uavs}", linewidth=1.0)
    ax.set_xlabel("subcarrier")
    ax.set_ylabel("|H(0, k)|")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
