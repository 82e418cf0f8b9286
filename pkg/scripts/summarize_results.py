"""
Quick script to summarize every result table in an output directory
"""
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import argparse
import json
from pathlib import Path

from dotenv import load_dotenv
load_dotenv()

import pandas as pd

from src.utils.config import get_config


def read_table(path: Path) -> tuple[pd.DataFrame, dict]:
    """Load a CSV or JSON result table together with its recorded parameters."""
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        return pd.DataFrame(payload["rows"]), payload.get("params", {})
    with open(path) as f:
        first = f.readline()
    params = json.loads(first.split(":", 1)[1]) if first.startswith("# params:") else {}
    return pd.read_csv(path, comment="#"), params


def summarize(frame: pd.DataFrame) -> str:
    if "metric" in frame.columns:
        summary = frame.groupby("metric")["value"].agg(["count", "min", "max"])
        return summary.to_string(float_format=lambda v: f"{v:.4f}")
    if {"x", "analytic"} <= set(frame.columns):
        gap = (frame["simulated"] - frame["analytic"]).abs().max()
        text = f"x in [{frame['x'].min():g}, {frame['x'].max():g}], analytic in [{frame['analytic'].min():.4g}, {frame['analytic'].max():.4g}]"
        return text if pd.isna(gap) else f"{text}, max |simulated - analytic| = {gap:.4f}"
    return frame.describe().to_string()


def main():
    parser = argparse.ArgumentParser(description="Summarize result tables")
    parser.add_argument("directory", nargs="?", default=None, help="Output directory (default: HYBRID_MTC_OUTPUT_DIR)")
    args = parser.parse_args()
    directory = Path(args.directory or get_config().OUTPUT_DIR)

    print("=" * 70)
    print(f"RESULTS SUMMARY - {directory}")
    print("=" * 70)

    paths = sorted(p for p in directory.rglob("*") if p.suffix in (".csv", ".json"))
    if not paths:
        print("\n⚠️  No result tables found.")
        print("=" * 70)
        return

    total_rows = 0
    for path in paths:
        print(f"\n📊 {path.relative_to(directory)}")
        print("-" * 70)
        try:
            frame, params = read_table(path)
            total_rows += len(frame)
            network = params.get("network", {})
            if network:
                print("  " + ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in network.items()))
            print(summarize(frame))
        except Exception as e:
            print(f"  ERROR - {e}")

    print("\n" + "=" * 70)
    print(f"✅ {len(paths)} table(s), {total_rows} row(s)")
    print("=" * 70)


if __name__ == "__main__":
    main()
