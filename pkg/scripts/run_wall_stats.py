#!/usr/bin/env python3
"""Tethered domain-wall statistics on 15x15 boxes, 500 disorder samples.

Counts N_{n,k} per sample, hard-checks the deterministic wall bound and the
tether structure, and reports the subadditivity table of the means.  Pick the
pair source with --proxy {excited_pair,nested_volumes,perturbed_exterior}
(nested volumes needs width <= 13 so the outer box fits the solver budget).
"""

import sys

from eaglass.cli import main

if __name__ == "__main__":
    args = ["wall-stats", "--width", "15", "--height", "15",
            "--samples", "500", "--seed", "0",
            "--proxy", "perturbed_exterior",
            "--n-list", "1,2,3,4,5,6,7", "--k-list", "0,1,2,3",
            "--out", "wall_stats"]
    sys.exit(main(args + sys.argv[1:]))
