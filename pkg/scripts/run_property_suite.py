#!/usr/bin/env python3
"""Full property suite on the default paper-style box (7x7, 100 samples).

Extra CLI flags are passed straight through, e.g.:
    python scripts/run_property_suite.py --box-n 2 --samples 50 --seed 7
"""

import sys

from eaglass.cli import main

if __name__ == "__main__":
    args = ["property-suite", "--width", "7", "--height", "7",
            "--samples", "100", "--seed", "0", "--out", "property_suite"]
    sys.exit(main(args + sys.argv[1:]))
