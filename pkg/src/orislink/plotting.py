"""Figure rendering for the report path.

The CSV/JSON files are the data contract; these helpers render companion
PNGs next to the delimited output (waterfall-style semilogy curves, with
Monte Carlo points and their confidence intervals overlaid when present).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .performance import PerformanceCurve

__all__ = ["save_curve_figure", "save_compare_figure"]

_STYLE = {
    "figure.figsize": (10.0, 4.2),
    "axes.grid": True,
    "grid.linestyle": "--",
    "grid.linewidth": 0.6,
    "grid.alpha": 0.6,
    "legend.fontsize": 9,
}


def _finite(axis, series):
    x = np.asarray(axis, dtype=float)
    y = np.asarray(series, dtype=float)
    keep = np.isfinite(y) & (y > 0.0)
    return x[keep], y[keep]


def _panel(ax, axis, named_series, ylabel, title):
    for label, series, style in named_series:
        x, y = _finite(axis, series)
        if x.size:
            ax.semilogy(x, y, style, label=label, markevery=1)
    ax.set_xlabel("transmit power (dBm)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()


def save_curve_figure(curve: PerformanceCurve, path) -> None:
    """Two-panel outage/BER figure for an analytic sweep."""
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        cols = curve.columns
        _panel(
            ax1,
            curve.axis_dbm,
            [
                ("exact", cols["outage_exact"], "-o"),
                ("asymptotic", cols["outage_asymptotic"], "--"),
            ],
            "outage probability",
            f"outage (threshold {10 * np.log10(curve.gamma_th):.1f} dB)",
        )
        _panel(
            ax2,
            curve.axis_dbm,
            [
                ("asymptotic", cols["ber_asymptotic"], "--"),
                ("exact numeric", cols["ber_exact_numeric"], "-o"),
            ],
            "average BER",
            "bit error rate",
        )
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)


def save_compare_figure(axis_dbm, rows, gamma_th, path) -> None:
    """Analytic curves with Monte Carlo estimates and 99% interval bars.

    ``rows`` is the list of per-point dicts assembled by the compare
    command (keys match the compare CSV columns).
    """
    axis = np.asarray(axis_dbm, dtype=float)

    def col(name):
        return np.asarray([row[name] for row in rows], dtype=float)

    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        for ax, stem, label in ((ax1, "outage", "outage probability"),
                                (ax2, "ber", "average BER")):
            if stem == "outage":
                series = [("exact", col("outage_exact"), "-"),
                          ("asymptotic", col("outage_asymptotic"), "--")]
            else:
                series = [("exact numeric", col("ber_exact_numeric"), "-"),
                          ("asymptotic", col("ber_asymptotic"), "--")]
            for name, values, style in series:
                x, y = _finite(axis, values)
                if x.size:
                    ax.semilogy(x, y, style, label=name)
            est = col(f"{stem}_mc")
            lo = col(f"{stem}_mc_ci_low")
            hi = col(f"{stem}_mc_ci_high")
            keep = np.isfinite(est) & (est > 0.0)
            if np.any(keep):
                yerr = np.vstack([
                    np.clip(est[keep] - lo[keep], 0.0, None),
                    np.clip(hi[keep] - est[keep], 0.0, None),
                ])
                ax.errorbar(axis[keep], est[keep], yerr=yerr, fmt="s",
                            markersize=4, capsize=3, label="Monte Carlo")
            ax.set_xlabel("transmit power (dBm)")
            ax.set_ylabel(label)
            ax.legend()
        ax1.set_title(f"outage (threshold {10 * np.log10(gamma_th):.1f} dB)")
        ax2.set_title("bit error rate")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
