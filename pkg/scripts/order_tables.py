"""Averaged smooth-data orders for r = 3 and 4 in both data modes.

Usage: python3 scripts/order_tables.py [OUTPUT_DIR]
"""

from __future__ import annotations

import sys
from pathlib import Path

from oweno.cli import main


def run(out: Path) -> int:
    status = 0
    for r, levels in ((3, 6), (4, 5)):
        for mode in ("point", "cell"):
            target = out / f"order_r{r}_{mode}"
            status |= main(["order-study", "--r", str(r), "--mode", mode,
                            "--levels", str(levels), "-o", str(target)])
    return status


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1] if len(sys.argv) > 1 else "results")))
