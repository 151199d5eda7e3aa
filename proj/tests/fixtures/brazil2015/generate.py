#!/usr/bin/env python3
"""Builds the 67-activity acceptance bundle under bundle/.

First-stage tax by destination comes from table2.csv (after the unit
reconciliation listed in README.md). Intermediate flows, final demand,
supply and the split of intermediate tax across purchasing activities are
synthetic but deterministic (fixed seed). Rerun after editing table2.csv:

    python3 generate.py
"""

import csv
import json
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
OUT = HERE / "bundle"
SEED = 2015

COMPONENTS = ["exports", "government", "households", "isflsf", "gfcf", "inventory"]

# (code, column, delta): rounding reconciliation so that every row's
# statutory equals the sum of its destinations and the column totals equal
# the published Total row.
RECONCILE = [
    ("S08", "intermediate", -1),
    ("S19", "households", -1),
    ("S24", "households", +1),
    ("S25", "households", -1),
    ("S39", "households", +1),
    ("S46", "households", +1),
    ("S32", "gfcf", -1),
    ("S32", "households", +1),
]

MARGINS = {"S41": 0.895, "S42": 0.322, "S43": 0.079}
PUBLIC = {"S60", "S61", "S63"}
DOMESTIC = "S67"

TAX_REVENUE = [
    ("ICMS", 396513), ("Cofins", 199876), ("ISS", 58083), ("PIS", 39825),
    ("IPI", 48048), ("Foreign trade taxes", 39969), ("IOF", 34681),
    ("ITBI", 11106), ("Cide-Combustiveis", 3271),
]


def read_table2():
    with open(HERE / "table2.csv", newline="") as f:
        rows = [r for r in csv.DictReader(f) if r["code"] != "TOTAL"]
    for r in rows:
        for k in ("statutory", "intermediate", "exports", "government",
                  "households", "gfcf"):
            r[k] = int(r[k])
    by_code = {r["code"]: r for r in rows}
    for code, col, delta in RECONCILE:
        by_code[code][col] += delta
    return rows


def main():
    rng = np.random.default_rng(SEED)
    rows = read_table2()
    n = len(rows)
    codes = [r["code"] for r in rows]

    for r in rows:
        dest = r["intermediate"] + r["exports"] + r["government"] + \
            r["households"] + r["gfcf"]
        assert dest == r["statutory"], (r["code"], dest, r["statutory"])

    flows = np.zeros((n, n))
    fd = np.zeros((n, len(COMPONENTS)))
    buyers = [j for j in range(n) if codes[j] != DOMESTIC]
    for i, r in enumerate(rows):
        if codes[i] == DOMESTIC:
            fd[i, COMPONENTS.index("households")] = 62000.0
            continue
        # Intermediate sales: enough base that the implied tax rate on
        # intermediate sales sits between 5% and 15%.
        sales = r["intermediate"] / rng.uniform(0.05, 0.15) + rng.uniform(500, 5000)
        k = int(rng.integers(8, 26))
        picks = rng.choice(buyers, size=k, replace=False)
        weights = rng.dirichlet(np.ones(k))
        flows[i, picks] = np.round(sales * weights, 3)

        for comp in ("exports", "government", "households", "gfcf"):
            tax = r[comp]
            value = tax / rng.uniform(0.08, 0.25) if tax > 0 else 0.0
            if rng.uniform() < 0.5:
                value += rng.uniform(0.0, 3000.0)
            fd[i, COMPONENTS.index(comp)] = round(value, 3)
        if codes[i] in PUBLIC:
            fd[i, COMPONENTS.index("government")] = round(rng.uniform(2e5, 6e5), 3)
        if rng.uniform() < 0.3:
            fd[i, COMPONENTS.index("isflsf")] = round(rng.uniform(0, 200), 3)
        if i < 38 and rng.uniform() < 0.6:
            fd[i, COMPONENTS.index("inventory")] = round(rng.uniform(-300, 300), 3)

    supply = flows.sum(axis=1) + fd.sum(axis=1)

    taxdest = np.zeros((n, n + len(COMPONENTS)))
    for i, r in enumerate(rows):
        idi = float(r["intermediate"])
        row = flows[i]
        if idi != 0.0:
            cols = np.nonzero(row)[0]
            shares = np.round(idi * row[cols] / row[cols].sum(), 6)
            shares[-1] = round(idi - shares[:-1].sum(), 6)
            taxdest[i, cols] = shares
        for comp in ("exports", "government", "households", "gfcf"):
            taxdest[i, n + COMPONENTS.index(comp)] = r[comp]

    OUT.mkdir(exist_ok=True)

    def write(name, header, body):
        with open(OUT / name, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["code"] + header)
            for code, values in zip(codes, body):
                w.writerow([code] + [repr(float(v)) for v in values])

    write("flows.csv", codes, flows)
    write("finaldemand.csv", COMPONENTS, fd)
    write("supply.csv", ["supply"], supply.reshape(-1, 1))
    stat = np.array([[float(r["statutory"])] for r in rows])
    write("taxdest.csv", codes + COMPONENTS + ["statutory"],
          np.hstack([taxdest, stat]))
    write("marginshares.csv", ["share"],
          [[MARGINS.get(c, 0.0)] for c in codes])

    manifest = {
        "delimiter": ",",
        "activities": [{"code": r["code"], "label": r["label"]} for r in rows],
        "margin_activities": sorted(MARGINS),
        "components": COMPONENTS,
        "tables": {
            "flows": "flows.csv",
            "finaldemand": "finaldemand.csv",
            "supply": "supply.csv",
            "taxdest": "taxdest.csv",
            "marginshares": "marginshares.csv",
        },
        "metadata": {
            "year": 2015,
            "currency": "BRL million",
            "source": "first-stage tax from published 2015 activity aggregates; "
                      "flows and final demand synthetic (seed %d)" % SEED,
            "tax_revenue": [{"tax": t, "amount": a} for t, a in TAX_REVENUE],
        },
    }
    with open(OUT / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, ensure_ascii=False)
        f.write("\n")


if __name__ == "__main__":
    main()
