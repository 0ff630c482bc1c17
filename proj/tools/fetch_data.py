#!/usr/bin/env python3
"""Materialize the MovieLens-100K trace and a zip-code geocode table.

The ml-100k files are taken from the copy bundled in the RecBole wheel and
rewritten in the original GroupLens layout (u.data tab-separated, u.user
pipe-separated). Zip coordinates come from the `zipcodes` package.

Usage: fetch_data.py [--out DIR]   (default: $DEEPREF_DATA_DIR or ./data)
"""

import argparse
import os
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

RECBOLE = "recbole==1.2.1"
ML_PREFIX = "recbole/dataset_example/ml-100k/"


def download_wheel(spec: str, dest: Path) -> Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(dest), spec],
        check=True,
    )
    name = spec.split("==")[0]
    wheels = sorted(dest.glob(f"{name}-*.whl"))
    if not wheels:
        raise SystemExit(f"no wheel downloaded for {spec}")
    return wheels[-1]


def write_ml100k(out: Path, wheel: Path) -> None:
    z = zipfile.ZipFile(wheel)
    inter = z.read(ML_PREFIX + "ml-100k.inter").decode().splitlines()[1:]
    users = z.read(ML_PREFIX + "ml-100k.user").decode().splitlines()[1:]
    ml = out / "ml-100k"
    ml.mkdir(parents=True, exist_ok=True)
    with open(ml / "u.data", "w", newline="\n") as f:
        for line in inter:
            u, i, r, t = line.split("\t")
            f.write(f"{u}\t{i}\t{int(float(r))}\t{int(float(t))}\n")
    with open(ml / "u.user", "w", newline="\n") as f:
        for line in users:
            f.write("|".join(line.split("\t")) + "\n")
    print(f"wrote {len(inter)} ratings, {len(users)} users to {ml}")


def write_zip_table(out: Path) -> None:
    try:
        import zipcodes
    except ImportError:
        subprocess.run([sys.executable, "-m", "pip", "install", "-q", "zipcodes"], check=True)
        import zipcodes
    rows = []
    for rec in zipcodes.list_all():
        try:
            rows.append((rec["zip_code"], float(rec["lat"]), float(rec["long"])))
        except (TypeError, ValueError):
            continue
    rows.sort()
    with open(out / "zip_geo.csv", "w", newline="\n") as f:
        f.write("zip,lat,lon\n")
        for z, lat, lon in rows:
            f.write(f"{z},{lat:.4f},{lon:.4f}\n")
    print(f"wrote {len(rows)} zip coordinates to {out / 'zip_geo.csv'}")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.environ.get("DEEPREF_DATA_DIR", "data"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        write_ml100k(out, download_wheel(RECBOLE, Path(tmp)))
    write_zip_table(out)


if __name__ == "__main__":
    main()
