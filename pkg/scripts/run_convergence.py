#!/usr/bin/env python3
"""Window-restricted GSP agreement across nested volumes n = 2..6.

Couplings extend consistently across box sizes (shared absolute edge keys);
the report tabulates disagreement frequencies between consecutive volumes.
"""

import sys

from eaglass.cli import main

if __name__ == "__main__":
    args = ["convergence", "--n-list", "2,3,4,5,6", "--window", "3x2",
            "--samples", "200", "--seed", "0", "--out", "convergence"]
    sys.exit(main(args + sys.argv[1:]))
