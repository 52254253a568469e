#!/usr/bin/env python3
"""Regenerate the bundled table of Riemann zeta zero ordinates.

Computes the ordinates of the first nontrivial zeros up to a target height
with mpmath and writes one decimal per line, ascending.  The bundled file
covers heights up to a little past 2000 so that windows [T, 2T] with
T <= 1000 stay inside the data.
"""

import argparse

import mpmath as mp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--height", type=float, default=2010.0)
    ap.add_argument("--dps", type=int, default=25)
    ap.add_argument("--out", default="src/psibound/data/zeros_2000.txt")
    args = ap.parse_args()

    mp.mp.dps = args.dps
    rows = []
    k = 1
    while True:
        g = mp.im(mp.zetazero(k))
        if g > args.height:
            break
        rows.append(mp.nstr(g, 17, strip_zeros=False))
        k += 1
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} ordinates up to {rows[-1]} -> {args.out}")


if __name__ == "__main__":
    main()
