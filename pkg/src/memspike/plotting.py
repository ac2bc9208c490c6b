"""Report figures rendered to files with the non-interactive Agg backend."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 8,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 150,
}
HALF = (9 / 2.54, 7 / 2.54)
FULL = (18 / 2.54, 7 / 2.54)
# no version string or timestamp, so files are reproducible
METADATA = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=METADATA)
    plt.close(fig)


def plot_volatility(report, path):
    """Volatile and non-volatile change against write amplitude."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=HALF)
        v = [r.v_w for r in report.records]
        ax.plot(v, [100 * r.delta_volatile for r in report.records], "o-", ms=3, label="volatile")
        ax.plot(v, [100 * r.delta_nonvolatile for r in report.records], "s-", ms=3, label="non-volatile")
        if report.found:
            ax.axvline(report.extracted_v_th, color="k", ls="--", lw=0.8,
                       label=f"V_th = {report.extracted_v_th:g} V")
        ax.axhspan(-100 * report.noise_floor, 100 * report.noise_floor, color="0.85", lw=0)
        ax.set_xlabel("write amplitude (V)")
        ax.set_ylabel("change in R (%)")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_bins(bins, spikes, band, path):
    """Per-bin relative change against the peak driven voltage, spikes highlighted."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=HALF)
        v = np.array([b.v_peak for b in bins])
        d = 100 * np.array([b.delta_rel for b in bins])
        s = np.asarray(spikes, dtype=bool)
        ax.scatter(v[~s], d[~s], s=6, c="0.5", label="no spike")
        ax.scatter(v[s], d[s], s=8, c="C3", label="spike")
        ax.axhline(-100 * band.threshold_neg + 100 * band.center, color="k", ls="--", lw=0.8)
        if band.threshold_pos is not None:
            ax.axhline(100 * (band.center + band.threshold_pos), color="k", ls="--", lw=0.8)
        ax.set_xlabel("peak bin voltage (V)")
        ax.set_ylabel("dR/R0 (%)")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_trace(recording, log, path):
    """Driven recording above, scheduled resistance reads below."""
    with plt.rc_context(STYLE):
        fig, (a0, a1) = plt.subplots(2, 1, figsize=FULL, sharex=True)
        t = np.arange(len(recording)) / recording.fs
        a0.plot(t, recording.samples, lw=0.4, c="k")
        a0.set_ylabel("V")
        idx = np.array([m.sample_index for m in log])
        a1.plot(idx / recording.fs, np.array([m.r for m in log]) / 1e6, ".-", ms=2, lw=0.5)
        a1.set_ylabel("R (MOhm)")
        a1.set_xlabel("time (s)")
        _save(fig, path)


def plot_recording(recording, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=FULL)
        t = np.arange(len(recording)) / recording.fs
        ax.plot(t, recording.samples, lw=0.4, c="k")
        if recording.ground_truth:
            gt = np.array(recording.ground_truth)
            ax.plot(gt / recording.fs, recording.samples[gt], "v", c="C3", ms=3)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("V")
        _save(fig, path)


def plot_roc(summaries, path):
    """Per-repeat points and per-gain averages in ROC space."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=HALF)
        for i, s in enumerate(summaries):
            c = f"C{i % 10}"
            pts = [(p.counts.fpr, p.counts.tpr) for p in s.points]
            ax.scatter([x for x, _ in pts], [y for _, y in pts], s=8, c=c, alpha=0.5)
            if not (math.isnan(s.mean_fpr) or math.isnan(s.mean_tpr)):
                ax.scatter([s.mean_fpr], [s.mean_tpr], marker="*", s=60, c=c, label=f"G = {s.gain:g}")
        ax.plot([0, 100], [0, 100], ls=":", c="0.6", lw=0.8)
        ax.set_xlim(-2, 102)
        ax.set_ylim(-2, 102)
        ax.set_xlabel("FPR (%)")
        ax.set_ylabel("TPR (%)")
        ax.legend(frameon=False, loc="lower right")
        _save(fig, path)
