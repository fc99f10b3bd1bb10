#!/usr/bin/env python3
import argparse
import os
import sys
from pathlib import Path
from typing import List

import matplotlib
# Non-interactive unless the caller picked a backend
if "MPLBACKEND" not in os.environ:
    matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

SERIES_COLUMNS = ("policy", "window", "hit_ratio")


def read_series(paths) -> pd.DataFrame:
    frames = []
    for p in paths:
        df = pd.read_csv(p)
        missing = [c for c in SERIES_COLUMNS if c not in df.columns]
        if missing:
            raise ValueError(f"{p}: missing columns {missing}")
        df["source"] = Path(p).parent.name
        frames.append(df)
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=SERIES_COLUMNS)


def plot_window_series(ax, df: pd.DataFrame, switches: List[int] = ()) -> None:
    many = df["source"].nunique() > 1
    for (src, policy), g in df.groupby(["source", "policy"], sort=False):
        label = f"{src} | {policy}" if many else policy
        ax.plot(g["window"], g["hit_ratio"], marker=".", label=label)
    for w in switches:
        ax.axvline(w, color="grey", linestyle="--", linewidth=1)
    ax.set_xlabel("Window (1000 requests)")
    ax.set_ylabel("Hit ratio")
    ax.set_ylim(0, 1)
    ax.set_title("Per-window hit ratio")
    ax.grid(True)
    ax.legend()


def save_fig(fig, outdir: Path, name: str) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{name}.png"
    fig.savefig(path, dpi=200, bbox_inches="tight")
    print(f"Saved: {path}")
    return path


def render(csv_paths, outdir: Path, switches: List[int] = ()) -> Path:
    df = read_series(csv_paths)
    if df.empty:
        raise ValueError("no rows to plot")
    base = "combo" if len(csv_paths) > 1 else Path(csv_paths[0]).parent.name or "series"
    fig, ax = plt.subplots(figsize=(10, 5))
    plot_window_series(ax, df, switches)
    plt.tight_layout()
    path = save_fig(fig, outdir, f"{base}_hit_ratio")
    plt.close(fig)
    return path


def main():
    ap = argparse.ArgumentParser(description="Plot per-window hit-ratio series and save PNGs.")
    ap.add_argument("csv", nargs="+", help="One or more window_series.csv files")
    ap.add_argument("--save", default="results/plots", help="Directory to save plots")
    ap.add_argument("--switch", type=int, nargs="*", default=[], help="Window indices to mark")
    args = ap.parse_args()
    try:
        render(args.csv, Path(args.save), args.switch)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
