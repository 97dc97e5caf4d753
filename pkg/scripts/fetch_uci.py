#!/usr/bin/env python3
"""Download the UCI regression tables into data/uci/<name>.csv.

Sources the widely mirrored benchmark copies (fixed column indices, raw
whitespace-delimited data.txt per dataset) and rewrites each as a headerless
comma CSV with the features first and the target in the last column, the
layout the bundled dataset catalog expects.  Needs network access.

The msd (year-prediction) table is not in that mirror; it is fetched from
the UCI archive as a zip and rewritten target-last.  It is large (~200 MB
download) and only fetched when asked for by name.
"""

import argparse
import csv
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

MIRROR = ("https://raw.githubusercontent.com/yaringal/DropoutUncertaintyExps/"
          "master/UCI_Datasets")

# local name -> mirror directory
MIRROR_DIRS = {
    "boston": "bostonHousing",
    "concrete": "concrete",
    "energy": "energy",
    "kin8nm": "kin8nm",
    "naval": "naval-propulsion-plant",
    "power": "power-plant",
    "protein": "protein-tertiary-structure",
    "wine": "wine-quality-red",
    "yacht": "yacht",
}

MSD_URL = ("https://archive.ics.uci.edu/static/public/203/"
           "yearpredictionmsd.zip")


def fetch_text(url, timeout=120):
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read().decode("utf-8")


def fetch_mirror_dataset(name, dest, force):
    out_path = dest / f"{name}.csv"
    if out_path.exists() and not force:
        print(f"{name}: exists, skipping ({out_path})")
        return
    base = f"{MIRROR}/{MIRROR_DIRS[name]}/data"
    data = fetch_text(f"{base}/data.txt")
    feat_idx = [int(t) for t in fetch_text(f"{base}/index_features.txt").split()]
    targ_idx = [int(t) for t in fetch_text(f"{base}/index_target.txt").split()]
    if len(targ_idx) != 1:
        raise ValueError(f"{name}: expected one target column, got {targ_idx}")
    rows = [line.split() for line in data.splitlines() if line.strip()]
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow([row[i] for i in feat_idx] + [row[targ_idx[0]]])
    print(f"{name}: {len(rows)} rows x {len(feat_idx)} features -> {out_path}")


def fetch_msd(dest, force):
    out_path = dest / "msd.csv"
    if out_path.exists() and not force:
        print(f"msd: exists, skipping ({out_path})")
        return
    print("msd: downloading (large file, be patient)")
    with urllib.request.urlopen(MSD_URL, timeout=600) as resp:
        blob = resp.read()
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        raw = zf.read("YearPredictionMSD.txt").decode("utf-8")
    count = 0
    # source rows are target-first; rewrite them target-last
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for line in raw.splitlines():
            if not line.strip():
                continue
            cells = line.split(",")
            writer.writerow(cells[1:] + [cells[0]])
            count += 1
    print(f"msd: {count} rows -> {out_path}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("names", nargs="*", default=[],
                        help="datasets to fetch (default: all mirror-hosted ones); "
                             f"known: {', '.join(sorted(MIRROR_DIRS))}, msd")
    parser.add_argument("--dest", default="data/uci", help="output directory")
    parser.add_argument("--force", action="store_true",
                        help="re-download even when the CSV already exists")
    args = parser.parse_args(argv)

    names = args.names or sorted(MIRROR_DIRS)
    unknown = [n for n in names if n not in MIRROR_DIRS and n != "msd"]
    if unknown:
        parser.error(f"unknown dataset name(s): {', '.join(unknown)}")

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    failures = []
    for name in names:
        try:
            if name == "msd":
                fetch_msd(dest, args.force)
            else:
                fetch_mirror_dataset(name, dest, args.force)
        except Exception as exc:  # keep going; report at the end
            failures.append(f"{name}: {exc}")
            print(f"{name}: FAILED ({exc})", file=sys.stderr)
    if failures:
        print(f"{len(failures)} dataset(s) failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
