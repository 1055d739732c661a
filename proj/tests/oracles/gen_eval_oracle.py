#!/usr/bin/env python3
"""Reference values for the evaluation layer.

Freezes numpy's linear-interpolation percentiles and population std for a
fixed sample (checked against summarize) and the standard-error scaling law
used by the Monte Carlo invariant test. Frozen into tests/test_eval.cpp.
"""
import numpy as np


def stats(xs):
    a = np.asarray(xs, dtype=float)
    return dict(
        count=len(a),
        mean=a.mean(),
        std=a.std(),  # population
        min=a.min(),
        q25=np.percentile(a, 25),
        median=np.percentile(a, 50),
        q75=np.percentile(a, 75),
        max=a.max(),
    )


def main():
    samples = {
        # deliberately unsorted, with a repeat and a negative
        "mixed8": [3.5, -1.0, 2.0, 2.0, 10.0, 0.5, 7.25, 4.0],
        "five": [1.0, 2.0, 3.0, 4.0, 5.0],
        "single": [42.0],
    }
    for name, xs in samples.items():
        print(f"# {name}")
        for k, v in stats(xs).items():
            print(f"{k} = {v!r}")
        print()

    # nearest-by-log-distance checks for a geometric row with a zero node
    row = [0.0, 10.0, 20.0, 40.0, 80.0]
    for w in [0.0, -5.0, 1e-9, 10.0, 14.0, 14.1421356, 14.15, 28.28, 28.3, 500.0]:
        pos = [x for x in row if x > 0.0]
        if w <= 0:
            idx = 0
        else:
            lg = np.log(w)
            d = [abs(lg - np.log(x)) for x in pos]
            best = int(np.argmin(d))  # ties: argmin takes the lower index
            idx = row.index(pos[best])
        print(f"nearest({w!r}) = {idx}")


if __name__ == "__main__":
    main()
