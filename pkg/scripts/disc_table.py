"""Orders at a jump for every admissible offset, r = 3 and 4.

Usage: python3 scripts/disc_table.py [OUTPUT_DIR]
"""

from __future__ import annotations

import sys
from pathlib import Path

from oweno.cli import main


def run(out: Path) -> int:
    status = 0
    for r in (3, 4):
        for mode in ("point", "cell"):
            status |= main(["disc-study", "--r", str(r), "--mode", mode, "--levels", "6",
                            "-o", str(out / f"disc_r{r}_{mode}")])
    return status


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1] if len(sys.argv) > 1 else "results")))
