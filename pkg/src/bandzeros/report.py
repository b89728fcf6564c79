"""Deterministic report emission: CSV and JSON tables, optional figures.

Every float is printed with 17 significant digits so that identical inputs
produce byte-identical files.  JSON is emitted through a small serializer
with a fixed key order instead of json.dump, which would use the shortest
round-trip float representation.
"""

from __future__ import annotations

import csv
import io
import json
import os


def fmt(v) -> str:
    """17-significant-digit decimal form of a float."""
    return f"{float(v):.17g}"


def _json_value(obj, indent, level):
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}{json.dumps(str(k))}: {_json_value(v, indent, level + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{closing}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_json_value(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{closing}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return fmt(obj)
    if isinstance(obj, int):
        return str(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def dumps_json(obj) -> str:
    return _json_value(obj, 2, 0) + "\n"


def write_json(obj, path):
    with open(path, "w", newline="") as fh:
        fh.write(dumps_json(obj))


def write_csv(header, rows, path):
    """Write rows (iterables of already-formatted cells) with a LF newline."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(list(row))
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


COMPARISON_COLUMNS = (
    "n", "j", "actual", "predicted", "defect",
    "occupancy_actual", "occupancy_predicted", "interior_flag",
)


def comparison_csv_rows(table):
    """One CSV row per (n, band); gap columns are blank for the last band."""
    rows = []
    for r in table.rows:
        for j, (a, p) in enumerate(zip(r.actual_counts, r.predicted_counts)):
            in_gap = j < len(r.occupancy_actual)
            rows.append((
                r.n, j + 1, a, p, abs(a - p),
                r.occupancy_actual[j] if in_gap else "",
                r.occupancy_predicted[j] if in_gap else "",
                int(r.interior_flag),
            ))
    return rows


def write_comparison_csv(table, path):
    write_csv(COMPARISON_COLUMNS, comparison_csv_rows(table), path)


def comparison_record(table):
    return {
        "rows": [
            {
                "n": r.n,
                "actual_counts": list(r.actual_counts),
                "predicted_counts": list(r.predicted_counts),
                "defect": r.defect,
                "occupancy_actual": list(r.occupancy_actual),
                "occupancy_predicted": list(r.occupancy_predicted),
                "interior_flag": r.interior_flag,
            }
            for r in table.rows
        ],
        "summary": {
            "max_defect": table.max_defect,
            "flagged_exact": table.flagged_exact,
            "occupancy_match_rate": float(table.occupancy_match_rate),
        },
    }


def write_comparison_json(table, path):
    write_json(comparison_record(table), path)


def histogram_series(acc_report, gaps, bins=64):
    """Per gap: (x, visit-count) series over a uniform bin grid."""
    series = []
    for j, (lo, hi) in enumerate(gaps):
        xs = acc_report.visited[j]
        width = (hi - lo) / bins
        counts = [0] * bins
        for x in xs:
            i = min(bins - 1, max(0, int((float(x) - lo) / width)))
            counts[i] += 1
        centers = [lo + (i + 0.5) * width for i in range(bins)]
        series.append((centers, counts))
    return series


def write_histogram_csv(acc_report, gaps, path, bins=64):
    rows = []
    for j, (centers, counts) in enumerate(histogram_series(acc_report, gaps, bins)):
        for x, c in zip(centers, counts):
            rows.append((j + 1, fmt(x), c))
    write_csv(("gap", "x", "visits"), rows, path)


def _agg_pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_comparison(table, path):
    """Defect per n and the interior flag, rendered to an image file."""
    plt = _agg_pyplot()
    ns = [r.n for r in table.rows]
    defects = [r.defect for r in table.rows]
    flags = [int(r.interior_flag) for r in table.rows]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.step(ns, defects, where="mid", label="count defect")
    ax.plot(ns, flags, ".", markersize=3, label="interior flag")
    ax.set_xlabel("n")
    ax.set_ylabel("defect / flag")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_histogram(acc_report, gaps, path, bins=64):
    """Visit histogram of the forecast gap points, one panel per gap."""
    plt = _agg_pyplot()
    series = histogram_series(acc_report, gaps, bins)
    g = max(1, len(series))
    fig, axes = plt.subplots(g, 1, figsize=(8, 2.5 * g), squeeze=False)
    for j, (centers, counts) in enumerate(series):
        ax = axes[j][0]
        width = (gaps[j][1] - gaps[j][0]) / bins
        ax.bar(centers, counts, width=width)
        ax.set_xlabel(f"gap {j + 1}")
        ax.set_ylabel("visits")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
