"""Regenerate the synthetic fixture tables shipped in src/invbandit/data.

The tables only mimic the published ranges of the battery and gene
expression datasets; they are not the original measurements.
"""
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "invbandit" / "data"


def write(name, ids, means, stds):
    with open(OUT / name, "w", encoding="utf-8") as fh:
        fh.write("arm_id,mean,std\n")
        for a, m, s in zip(ids, means, stds):
            fh.write(f"{a},{float(m)!r},{float(s)!r}\n")


def main():
    rng = np.random.default_rng(20220101)

    # 224 charging protocols, lifetimes spanning [573, 1208] cycles
    high = np.round(rng.uniform(573.0, 1208.0, size=224), 1)
    high[rng.choice(224, size=2, replace=False)] = [573.0, 1208.0]
    write("battery_high.csv", [str(i) for i in range(1, 225)], high, [164.0] * 224)

    low = np.round(rng.uniform(901.0, 962.0, size=224), 1)
    low[rng.choice(224, size=2, replace=False)] = [901.0, 962.0]
    write("battery_low.csv", [str(i) for i in range(1, 225)], low, [164.0] * 224)

    # knock-down fluorescence, means spanning [-1.3, 2.01], variance 0.1
    n = 1500
    ids = np.sort(rng.choice(np.arange(1, 12979), size=n - 1, replace=False)).tolist() + [12979]
    means = np.round(np.clip(rng.normal(0.2, 0.45, size=n), -1.3, 2.01), 4)
    means[:2] = [-1.3, 2.01]
    write("gene_expression.csv", [str(i) for i in ids], means, [round(0.1 ** 0.5, 6)] * n)


if __name__ == "__main__":
    main()
