"""CSV and plot emission for verification runs.

Reports embed the config echo and package version so a run is reproducible
from the report alone.  Plot generation is best-effort: failures are
reported but never fail a verification.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_lines(path: Path, lines: list[str]):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def prediction_csv_lines(prediction) -> list[str]:
    lines = ["exponent_re,exponent_im,re_coefficient,im_coefficient,provenance"]
    for e, c, tag in prediction:
        e = complex(e)
        lines.append(f"{e.real!r},{e.imag!r},{c.real!r},{c.imag!r},{tag}")
    return lines


def residual_plot(path: Path, ts, values, prediction) -> str | None:
    """Log-log plot of |trace| and |residual after prediction|; returns an
    error message instead of raising on any failure."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        ts = np.asarray(ts, dtype=float)
        values = np.asarray(values, dtype=complex)
        resid = np.abs(values - prediction.evaluate(ts))
        fig, ax = plt.subplots(figsize=(6, 4.2))
        ax.loglog(ts, np.abs(values), "o-", label="|oracle trace|")
        positive = resid > 0
        if np.any(positive):
            ax.loglog(ts[positive], resid[positive], "s--",
                      label="|residual after prediction|")
        ax.set_xlabel("t")
        ax.set_ylabel("magnitude")
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
        return None
    except Exception as exc:  # plotting must never fail a verification
        return f"plot skipped: {exc}"


def report_header(label: str, config_text: str) -> list[str]:
    from . import __version__

    lines = [f"# tortrace {__version__} report: {label}", "#", "# config echo:"]
    lines.extend("#   " + line for line in config_text.splitlines())
    lines.append("#")
    return lines
