"""Matplotlib report figures written next to the CSV/JSON outputs."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# Strip the version string so identical data gives identical files.
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}

STYLE = {
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.fontsize": 8,
}


def new_figure(nrows=1, ncols=1, width=6.4, height=None):
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    height = height or width * golden * nrows / ncols
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(nrows, ncols, figsize=(width, height), squeeze=False)
    return fig, axes


def save(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_training_curves(metrics_by_label, path):
    """Mean episode reward, loss and TD error per logging window, one line per run."""
    with plt.rc_context(STYLE):
        fig, axes = new_figure(3, 1, width=6.0, height=7.0)
        panels = (("mean_reward", "mean episode reward"), ("mean_loss", "mean loss"),
                  ("mean_td_error", "mean |TD error|"))
        for ax, (field, label) in zip(axes[:, 0], panels):
            for name, metrics in metrics_by_label.items():
                ep = [r.episode for r in metrics.records]
                ax.plot(ep, [getattr(r, field) for r in metrics.records], label=name, lw=1.2)
            ax.set_ylabel(label)
        axes[-1, 0].set_xlabel("episode")
        axes[0, 0].legend(loc="lower right")
        save(fig, path)


def plot_tournament(result, path):
    """Per-repeat success rates for both teams with the min-max band shaded."""
    blue, red = result.rates("blue"), result.rates("red")
    x = np.arange(len(blue))
    with plt.rc_context(STYLE):
        fig, axes = new_figure(width=5.0)
        ax = axes[0, 0]
        ax.bar(x - 0.2, blue, 0.4, color="#1f4fd1", label=f"blue ({result.config.get('blue', '')})")
        ax.bar(x + 0.2, red, 0.4, color="#c81e1e", label=f"red ({result.config.get('red', '')})")
        ax.axhspan(min(blue), max(blue), color="#1f4fd1", alpha=0.1)
        ax.axhspan(min(red), max(red), color="#c81e1e", alpha=0.1)
        ax.set_xticks(x)
        ax.set_xticklabels([str(i + 1) for i in x])
        ax.set_xlabel("repeat")
        ax.set_ylabel("2v1 success rate")
        ax.set_ylim(0, 1)
        ax.legend(loc="upper right")
        save(fig, path)
