"""File reports: delimited summaries with matplotlib figures alongside.

Used by the bench and validate commands when an output directory is given.
Figures are rendered with the Agg backend so reports work headless.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluate import COMBINED, EvaluationReport  # noqa: E402
from .rules import ValidationReport  # noqa: E402


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_bench_report(report: EvaluationReport, out_dir: str | Path) -> list[Path]:
    """summary.csv, per_incident.csv, accuracy.png, runtime_ms.png."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    summary_rows = [
        [
            approach,
            kind,
            k,
            f"{report.accuracy[(approach, kind, k)]:.6f}",
            report.incident_counts[kind],
        ]
        for approach in report.approaches
        for kind in report.kinds
        for k in report.ks
    ]
    written.append(
        _write_csv(
            out_dir / "summary.csv",
            ["approach", "kind", "k", "accuracy", "incidents"],
            summary_rows,
        )
    )
    written.append(
        _write_csv(
            out_dir / "per_incident.csv",
            ["incident", "kind", "approach", "label_rank"],
            [
                [idx, kind, approach, "" if rank is None else rank]
                for idx, kind, approach, rank in report.per_incident
            ],
        )
    )

    fig, ax = plt.subplots(figsize=(7, 4))
    positions = range(len(report.approaches))
    width = 0.8 / len(report.ks)
    for j, k in enumerate(report.ks):
        values = [report.accuracy[(a, COMBINED, k)] for a in report.approaches]
        ax.bar([p + j * width for p in positions], values, width=width, label=f"top-{k}")
    ax.set_xticks([p + width * (len(report.ks) - 1) / 2 for p in positions])
    ax.set_xticklabels(report.approaches)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("accuracy (combined)")
    ax.set_title("Top-k accuracy by approach")
    ax.legend()
    fig.tight_layout()
    accuracy_png = out_dir / "accuracy.png"
    fig.savefig(accuracy_png, dpi=120)
    plt.close(fig)
    written.append(accuracy_png)

    fig, ax = plt.subplots(figsize=(7, 4))
    means = [report.runtime_ms[a][0] for a in report.approaches]
    peaks = [report.runtime_ms[a][1] for a in report.approaches]
    ax.bar(positions, means, width=0.4, label="mean")
    ax.bar([p + 0.4 for p in positions], peaks, width=0.4, label="max")
    ax.set_xticks([p + 0.2 for p in positions])
    ax.set_xticklabels(report.approaches)
    ax.set_ylabel("runtime per incident (ms)")
    ax.set_title("Analysis runtime by approach")
    ax.legend()
    fig.tight_layout()
    runtime_png = out_dir / "runtime_ms.png"
    fig.savefig(runtime_png, dpi=120)
    plt.close(fig)
    written.append(runtime_png)

    return written


def write_validation_report(
    report: ValidationReport,
    out_dir: str | Path,
    names: Sequence[str] | None = None,
    baseline: ValidationReport | None = None,
) -> list[Path]:
    """ranks.csv and a label-rank histogram; rank deltas in diff mode."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    names = list(names) if names is not None else [f"incident-{i}" for i in range(report.total)]

    rows = []
    for i, rank in enumerate(report.ranks):
        row = [names[i], "" if rank is None else rank]
        if baseline is not None:
            old = baseline.ranks[i]
            row.append("" if old is None else old)
            row.append("" if (rank is None or old is None) else old - rank)
        rows.append(row)
    header = ["incident", "label_rank"]
    if baseline is not None:
        header += ["baseline_rank", "improvement"]
    written.append(_write_csv(out_dir / "ranks.csv", header, rows))

    fig, ax = plt.subplots(figsize=(7, 4))
    buckets = ["1", "2", "3", ">3", "miss"]

    def bucketize(ranks):
        counts = dict.fromkeys(buckets, 0)
        for rank in ranks:
            if rank is None:
                counts["miss"] += 1
            elif rank <= 3:
                counts[str(rank)] += 1
            else:
                counts[">3"] += 1
        return [counts[b] for b in buckets]

    width = 0.4 if baseline is not None else 0.8
    ax.bar(range(len(buckets)), bucketize(report.ranks), width=width, label="current")
    if baseline is not None:
        ax.bar(
            [i + width for i in range(len(buckets))],
            bucketize(baseline.ranks),
            width=width,
            label="baseline",
        )
        ax.legend()
    ax.set_xticks([i + (width / 2 if baseline is not None else 0) for i in range(len(buckets))])
    ax.set_xticklabels(buckets)
    ax.set_xlabel("label rank")
    ax.set_ylabel("incidents")
    ax.set_title(f"Label ranks (top-1 {report.top1:.1%}, top-3 {report.top3:.1%})")
    fig.tight_layout()
    ranks_png = out_dir / "ranks.png"
    fig.savefig(ranks_png, dpi=120)
    plt.close(fig)
    written.append(ranks_png)
    return written
