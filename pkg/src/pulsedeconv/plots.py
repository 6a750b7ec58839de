"""Static SVG figures rendered from the experiment summary table."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_figures"]


def _series(summary, value_key):
    """Group (snr, value) points by (method, separation, sigma) line."""
    lines: dict = {}
    for row in summary:
        key = (row["method"], row["separation"], row["sigma"])
        lines.setdefault(key, []).append((row["snr_db"], row[value_key]))
    for pts in lines.values():
        pts.sort()
    return lines


def _plot(summary, value_key, ylabel, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for (method, sep, sigma), pts in sorted(_series(summary, value_key).items()):
        snr = [p[0] for p in pts]
        val = [p[1] for p in pts]
        ax.plot(snr, val, marker="o",
                label=f"{method}, sep {sep:g}×σN, σ={sigma:g}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def render_figures(summary: list, outdir) -> list:
    """Write localization-error and far-amplitude SVG figures; returns paths."""
    outdir = Path(outdir)
    written = []

    p = outdir / "loc_error_vs_snr.svg"
    _plot(summary, "mean_loc_error", "mean localization error (samples)", p)
    written.append(p)

    p = outdir / "loc_error_std_vs_snr.svg"
    _plot(summary, "std_loc_error", "localization error std (samples)", p)
    written.append(p)

    p = outdir / "far_amplitude_vs_snr.svg"
    _plot(summary, "mean_far_amp", "mean far false amplitude", p)
    written.append(p)
    return written
