"""Optional matplotlib renderings for the CLI report paths.

Figures are written next to the delimited output when ``--plot`` is
given; the library itself never imports this module.  PNG metadata is
stripped so that reruns are byte-stable.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVEKW = {"dpi": 110, "metadata": {"Software": None}}


def render_bound_report(report, path, title=""):
    names = list(report.terms)
    values = [report.terms[k] for k in names]
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.barh(names, values, color="#33557a")
    if report.oracle is not None:
        ax.axvline(report.oracle, color="#a03030", lw=1.2, label="oracle")
        ax.legend(frameon=False)
    ax.set_xlabel("bound term")
    ax.set_title(title or f"total = {report.total:.4g}")
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)


def render_points(points, path, title=""):
    fig, ax = plt.subplots(figsize=(4.8, 4.4))
    pts = points if hasattr(points, "ndim") else points.points
    if pts.shape[1] == 1:
        ax.plot(pts[:, 0], [0.0] * len(pts), "|", ms=18, color="#33557a")
        ax.set_yticks([])
    else:
        ax.plot(pts[:, 0], pts[:, 1], ".", ms=2.5, color="#33557a", alpha=0.6)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)


def render_counts(counts, path, title=""):
    import numpy as np

    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    values, freq = np.unique(np.asarray(counts), return_counts=True)
    ax.bar(values, freq / freq.sum(), width=0.85, color="#33557a")
    ax.set_xlabel("count")
    ax.set_ylabel("frequency")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)


def render_trajectory(times, sizes, path, title=""):
    fig, ax = plt.subplots(figsize=(6.4, 3.2))
    ax.step(times, sizes, where="post", color="#33557a")
    ax.set_xlabel("time")
    ax.set_ylabel("population size")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)


def render_table(rows, key, path, title=""):
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    labels = [str(r.get("family", i)) for i, r in enumerate(rows)]
    ax.bar(labels, [r[key] for r in rows], color="#33557a")
    ax.set_xlabel("family")
    ax.set_ylabel(key)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVEKW)
    plt.close(fig)
