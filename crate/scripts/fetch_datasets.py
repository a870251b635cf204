#!/usr/bin/env python3
"""Rebuild the benchmark CSV files under data/ from redistributable copies.

The UCI archive is not always reachable, so this script pulls the datasets
from Python packages that bundle them:

  * Ripley synth.tr / synth.te  -> pydataset (Rdatasets export of R's MASS)
  * Haberman, Statlog Heart, MAGIC gamma telescope -> keel-ds (KEEL repository)

Seismic-bumps, default-of-credit-card-clients, Diabetic Retinopathy Debrecen
and EEG Eye State are not bundled by any package we know of. Download them
from the UCI repository and convert them by hand (see data/README.md).

Usage: python3 scripts/fetch_datasets.py [--out data]
"""

import argparse
import csv
import hashlib
import io
import pathlib
import subprocess
import tarfile
import tempfile
import zipfile


def pip_download(package, dest):
    subprocess.run(
        ["pip", "download", "--no-deps", "--no-binary", ":none:", "-d", str(dest), package],
        check=True,
    )
    files = sorted(pathlib.Path(dest).iterdir())
    return [f for f in files if package.replace("-", "_") in f.name.replace("-", "_")][0]


def keel_rows(archive, name):
    with zipfile.ZipFile(archive) as z:
        member = next(n for n in z.namelist() if n.endswith(f"raw/{name}.dat"))
        text = z.read(member).decode()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        yield [v.strip() for v in line.split(",")]


def rdatasets_rows(archive, name):
    with tarfile.open(archive) as outer:
        member = next(m for m in outer.getmembers() if m.name.endswith("resources.tar.gz"))
        inner_bytes = outer.extractfile(member).read()
    with tarfile.open(fileobj=io.BytesIO(inner_bytes)) as inner:
        member = next(m for m in inner.getmembers() if m.name.endswith(f"csv/MASS/{name}.csv")
                      and "/._" not in m.name)
        text = inner.extractfile(member).read().decode()
    reader = csv.reader(io.StringIO(text))
    next(reader)
    for row in reader:
        yield row[1:]


def write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    out = pathlib.Path(args.out)

    with tempfile.TemporaryDirectory() as tmp:
        keel = pip_download("keel-ds", pathlib.Path(tmp) / "keel")
        rdata = pip_download("pydataset", pathlib.Path(tmp) / "pydataset")

        write_csv(out / "ripley" / "synth_tr.csv", ["xs", "ys", "yc"], rdatasets_rows(rdata, "synth.tr"))
        write_csv(out / "ripley" / "synth_te.csv", ["xs", "ys", "yc"], rdatasets_rows(rdata, "synth.te"))

        write_csv(out / "haberman" / "haberman.csv", ["age", "year", "nodes", "status"],
                  keel_rows(keel, "haberman"))
        write_csv(out / "heart" / "heart.csv",
                  ["age", "sex", "chest_pain", "rest_bp", "chol", "fbs", "rest_ecg", "max_hr",
                   "exang", "oldpeak", "slope", "vessels", "thal", "class"],
                  keel_rows(keel, "heart"))
        write_csv(out / "gamma" / "magic.csv",
                  ["length", "width", "size", "conc", "conc1", "asym", "m3long", "m3trans",
                   "alpha", "dist", "class"],
                  keel_rows(keel, "magic"))

    sums = []
    for p in sorted(out.rglob("*.csv")):
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
        sums.append(f"{digest}  {p.relative_to(out)}")
    (out / "SHA256SUMS").write_text("\n".join(sums) + "\n")
    print("\n".join(sums))


if __name__ == "__main__":
    main()
