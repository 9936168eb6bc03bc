#!/usr/bin/env python3
"""Two-coupling critical sets on 3x3 boxes with a 41x41 grid sweep.

Defaults probe an adjacent pair of edges; pass --edge / --edge2 for other
pairs, e.g. a vertex-disjoint pair:
    python scripts/run_two_bond_map.py --edge h:-1,0 --edge2 h:0,2
"""

import sys

from eaglass.cli import main

if __name__ == "__main__":
    args = ["two-bond-map", "--width", "3", "--height", "3",
            "--samples", "200", "--seed", "0",
            "--edge", "h:0,1", "--edge2", "v:0,1",
            "--grid-lo", "-3", "--grid-hi", "3", "--grid-points", "41",
            "--out", "two_bond_map"]
    sys.exit(main(args + sys.argv[1:]))
