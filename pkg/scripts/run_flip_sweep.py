#!/usr/bin/env python3
"""Single-coupling flip census around the exterior-energy critical value."""

import sys

from eaglass.cli import main

if __name__ == "__main__":
    args = ["flip-sweep", "--width", "5", "--height", "5",
            "--samples", "100", "--seed", "0", "--edge", "v:0,2",
            "--grid-points", "41", "--out", "flip_sweep"]
    sys.exit(main(args + sys.argv[1:]))
