"""Figures for CLI reports."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render(command: str, report: dict, directory: Path) -> list[str]:
    if command == "prop" and "properties" in report:
        return [_prop_figure(report, directory)]
    if command == "sample":
        return [_sample_figure(report, directory)]
    return []


def _prop_figure(report: dict, directory: Path) -> str:
    props = report["properties"]
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    bounds = sorted({c["bound"] for p in props for c in p["counterexamples"] if c["bound"] is not None})
    if bounds:
        width = 0.8 / len(props)
        for i, p in enumerate(props):
            per = Counter(c["bound"] for c in p["counterexamples"])
            xs = [b + i * width for b in bounds]
            ax.bar(xs, [per.get(b, 0) for b in bounds], width=width, label=p["name"])
        ax.set_xlabel("height bound of first discovery")
        ax.set_xticks([b + 0.4 - width / 2 for b in bounds], [str(b) for b in bounds])
    else:
        names = [p["name"] for p in props]
        ax.bar(names, [len(p["counterexamples"]) for p in props], label="counterexamples")
        ax.bar(names, [p["generated"] for p in props], alpha=0.3, label="generated")
    ax.set_ylabel("count")
    ax.set_title("counterexamples")
    ax.legend()
    fig.tight_layout()
    out = directory / "counterexamples.png"
    fig.savefig(out, dpi=100)
    plt.close(fig)
    return str(out)


def _sample_figure(report: dict, directory: Path) -> str:
    sizes = report.get("sizes", [])
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    if sizes:
        counts = Counter(sizes)
        xs = sorted(counts)
        ax.bar(xs, [counts[x] for x in xs])
    ax.set_xlabel("term size of generated bindings")
    ax.set_ylabel("samples")
    ax.set_title(f"{report['attempts']} attempts, {report['discarded']} discarded")
    fig.tight_layout()
    out = directory / "sample_sizes.png"
    fig.savefig(out, dpi=100)
    plt.close(fig)
    return str(out)
