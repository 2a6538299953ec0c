#!/usr/bin/env python3
"""Convert the raw UCI Adult and ProPublica COMPAS files into header-row CSVs.

Usage: prepare_data.py RAW_DIR OUT_DIR

RAW_DIR must contain adult.data, adult.test and compas-scores-two-years.csv.
Missing Adult values ("?") become empty fields so the loader drops those rows.
COMPAS rows are filtered the same way as the original ProPublica analysis,
which leaves 6172 defendants.
"""
import csv
import sys
from datetime import datetime
from pathlib import Path

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]

COMPAS_COLUMNS = [
    "sex", "age", "age_cat", "race", "juv_fel_count", "juv_misd_count",
    "juv_other_count", "priors_count", "c_charge_degree", "length_of_stay",
    "two_year_recid",
]


def convert_adult(src: Path, dst: Path) -> int:
    count = 0
    with src.open() as fin, dst.open("w", newline="") as fout:
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow(ADULT_COLUMNS)
        for line in fin:
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != len(ADULT_COLUMNS):
                continue
            fields = ["" if f == "?" else f for f in fields]
            fields[-1] = fields[-1].rstrip(".")
            writer.writerow(fields)
            count += 1
    return count


def convert_compas(src: Path, dst: Path) -> int:
    count = 0
    with src.open() as fin, dst.open("w", newline="") as fout:
        reader = csv.reader(fin)
        header = next(reader)
        idx = {}
        for i, name in enumerate(header):
            idx.setdefault(name, i)
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow(COMPAS_COLUMNS)
        for row in reader:
            get = lambda name: row[idx[name]]
            days = get("days_b_screening_arrest")
            if days == "" or not -30 <= int(float(days)) <= 30:
                continue
            if get("is_recid") == "-1" or get("c_charge_degree") == "O":
                continue
            if get("score_text") == "N/A":
                continue
            jail_in, jail_out = get("c_jail_in"), get("c_jail_out")
            if jail_in and jail_out:
                fmt = "%Y-%m-%d %H:%M:%S"
                delta = datetime.strptime(jail_out, fmt) - datetime.strptime(jail_in, fmt)
                stay = f"{delta.total_seconds() / 86400.0:.4f}"
            else:
                stay = ""
            writer.writerow([
                get("sex"), get("age"), get("age_cat"), get("race"),
                get("juv_fel_count"), get("juv_misd_count"),
                get("juv_other_count"), get("priors_count"),
                get("c_charge_degree"), stay, get("two_year_recid"),
            ])
            count += 1
    return count


def main() -> None:
    raw, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    print("adult train rows:", convert_adult(raw / "adult.data", out / "adult_train.csv"))
    print("adult test rows:", convert_adult(raw / "adult.test", out / "adult_test.csv"))
    print("compas rows:", convert_compas(raw / "compas-scores-two-years.csv", out / "compas.csv"))


if __name__ == "__main__":
    main()
