#!/usr/bin/env python3
"""Cross-volume window disagreement probe for pairs (2,3), (3,4), (4,5)."""

import sys

from eaglass.cli import main

if __name__ == "__main__":
    args = ["uniqueness-probe", "--n-pairs", "2:3,3:4,4:5", "--window", "3x2",
            "--samples", "200", "--seed", "0", "--out", "uniqueness"]
    sys.exit(main(args + sys.argv[1:]))
