//! Matplotlib scripts dropped next to the data. Each reads the CSV files in
//! its own directory and writes PNGs there.

pub const ANALYZE: &str = r#"import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "analyze_*.csv"))):
    law = os.path.basename(path)[len("analyze_"):-len(".csv")]
    curves = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            key = (row["metric"], int(row["source"]), row["method"])
            curves.setdefault(key, []).append((float(row["threshold"]), float(row["value"])))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, metric in zip(axes, ["AoI", "PAoI"]):
        for (m, source, method), pts in sorted(curves.items()):
            if m != metric:
                continue
            xs, ys = zip(*pts)
            style = "--" if method == "closed" else "-"
            ax.plot(xs, ys, style, label=f"source {source} ({method})")
        ax.set_xlabel("threshold")
        ax.set_title(f"{metric} violation, {law} service")
        ax.legend()
    axes[0].set_ylabel("probability")
    fig.tight_layout()
    fig.savefig(os.path.join(here, f"analyze_{law}.png"), dpi=150)
"#;

pub const SIMULATE: &str = r#"import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "comparison_*.csv"))):
    law = os.path.basename(path)[len("comparison_"):-len(".csv")]
    series = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            key = (row["metric"], int(row["source"]))
            series.setdefault(key, []).append(
                (float(row["threshold"]), float(row["analytic"]), float(row["empirical"]), float(row["standard_error"]))
            )
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, metric in zip(axes, ["AoI", "PAoI"]):
        for (m, source), pts in sorted(series.items()):
            if m != metric:
                continue
            xs, an, em, se = zip(*pts)
            line = ax.plot(xs, an, label=f"source {source} analytic")[0]
            ax.errorbar(xs, em, yerr=[1.96 * s for s in se], fmt="o", color=line.get_color(), label=f"source {source} simulated")
        ax.set_xlabel("threshold")
        ax.set_title(f"{metric} violation, {law} service")
        ax.legend()
    axes[0].set_ylabel("probability")
    fig.tight_layout()
    fig.savefig(os.path.join(here, f"simulate_{law}.png"), dpi=150)
"#;

pub const OPTIMIZE: &str = r#"import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = os.path.join(here, "optimize_sweep.csv")
if os.path.exists(path):
    curves = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            key = (row["metric"], row["thresholds"])
            curves.setdefault(key, []).append((float(row["rate"]), float(row["objective"])))
    metrics = sorted({m for m, _ in curves})
    fig, axes = plt.subplots(1, len(metrics), figsize=(5 * len(metrics), 4), squeeze=False)
    for ax, metric in zip(axes[0], metrics):
        for (m, thresholds), pts in sorted(curves.items()):
            if m == metric:
                xs, ys = zip(*pts)
                ax.plot(xs, ys, label="thresholds " + thresholds.replace(";", ", "))
        ax.set_xlabel("rate of the swept source")
        ax.set_ylabel("maximal violation probability")
        ax.set_title(metric)
        ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(here, "optimize_sweep.png"), dpi=150)
"#;

pub const SWEEP: &str = r#"import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
curves = {}
with open(os.path.join(here, "sweep.csv"), newline="") as f:
    for row in csv.DictReader(f):
        key = (row["metric"], row["thresholds"], row["allocation"])
        curves.setdefault(key, []).append((float(row["total_rate"]), float(row["objective"])))
metrics = sorted({m for m, _, _ in curves})
fig, axes = plt.subplots(1, len(metrics), figsize=(5 * len(metrics), 4), squeeze=False)
for ax, metric in zip(axes[0], metrics):
    for (m, thresholds, allocation), pts in sorted(curves.items()):
        if m == metric:
            xs, ys = zip(*pts)
            style = "-" if allocation == "optimal" else "--"
            ax.plot(xs, ys, style, label=f"{allocation}, thresholds " + thresholds.replace(";", ", "))
    ax.set_xlabel("total arrival rate")
    ax.set_ylabel("maximal violation probability")
    ax.set_yscale("log")
    ax.set_title(metric)
    ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "sweep.png"), dpi=150)
"#;
