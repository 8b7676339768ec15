"""SVG line plots of simulation traces."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

#: panels drawn when no signal list is given: (title, columns, y label)
DEFAULT_PANELS = (
    ("wind speed", ("nu",), "m/s"),
    ("rotor speed error", ("omega_err",), "rad/s"),
    ("pitch angle", ("theta_1", "theta_2", "theta_3"), "rad"),
    ("estimate", ("eta_hat_1", "eta_hat_2", "eta_hat_3"), "s"),
    ("fault factors", ("delta", "rho"), "-"),
)


def plot_trace(trace, path, signals=None, title=None, max_points=5000):
    """Write one stacked panel per signal group to ``path`` (SVG).

    Long traces are thinned by a fixed stride to at most ~``max_points`` per line.
    """
    if signals:
        unknown = [s for s in signals if s not in trace.columns]
        if unknown:
            raise ValueError(f"unknown trace columns: {unknown}")
        panels = [(s, (s,), "") for s in signals]
    else:
        panels = DEFAULT_PANELS
    stride = max(1, len(trace) // max_points)
    with plt.rc_context({"svg.hashsalt": "windpitch", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(len(panels), 1, sharex=True,
                                 figsize=(8, 1.8 * len(panels) + 0.6), squeeze=False)
        for ax, (name, cols, unit) in zip(axes[:, 0], panels):
            for c in cols:
                ax.plot(trace.t[::stride], trace[c][::stride], lw=0.8, label=c)
            ax.set_ylabel(f"{name} [{unit}]" if unit else name, fontsize=8)
            if len(cols) > 1:
                ax.legend(fontsize=7, loc="upper right")
            ax.grid(alpha=0.3)
        axes[-1, 0].set_xlabel("time [s]")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
