#!/usr/bin/env python3
"""Regenerate the synthetic `.bench` corpus bundled with the package.

Each circuit is a deterministic random sequential netlist size-matched to an
ITC'99 benchmark (gate count, flip-flop count, and I/O width in the same
ballpark as the real circuit of the same stem). Run from the repository root:

    python scripts/build_corpus.py
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from tklock.circuit import validate, write_bench
from tklock.synth import random_netlist

# name -> (seed, inputs, dffs, gates, outputs)
PROFILES = {
    "b01_like": (101, 2, 5, 45, 2),
    "b02_like": (102, 1, 4, 26, 1),
    "b03_like": (103, 4, 30, 150, 4),
    "b04_like": (104, 11, 66, 580, 8),
    "b06_like": (106, 2, 9, 56, 4),
    "b08_like": (108, 9, 21, 168, 4),
    "b09_like": (109, 1, 28, 131, 1),
    "b10_like": (110, 11, 17, 189, 6),
    "b11_like": (111, 7, 31, 700, 6),
    "b12_like": (112, 5, 121, 1070, 6),
    "b14_like": (114, 32, 245, 2440, 16),
}


def main() -> None:
    out_dir = pathlib.Path(__file__).resolve().parent.parent / "src" / "tklock" / "corpus"
    for name, (seed, n_in, n_ff, n_gates, n_out) in PROFILES.items():
        netlist = random_netlist(seed, n_in, n_ff, n_gates, n_out, name=name)
        problems = validate(netlist)
        if problems:
            raise SystemExit(f"{name}: {problems[0].message}")
        path = out_dir / f"{name}.bench"
        path.write_text(write_bench(netlist), encoding="utf-8")
        print(f"{name}: {len(netlist.gates)} gates, {len(netlist.dffs)} dffs -> {path.name}")


if __name__ == "__main__":
    main()
