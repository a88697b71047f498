"""Grid-refinement tables for the smooth scalar problems (N = 40..640).

Usage: python3 scripts/pde_convergence.py [OUTPUT_DIR]
"""

from __future__ import annotations

import sys
from pathlib import Path

from oweno.cli import main


def run(out: Path) -> int:
    status = 0
    for problem in ("advection", "burgers", "critical"):
        print(f"== {problem}")
        status |= main(["convergence", "--problem", problem, "--N", "40,80,160,320,640",
                        "-o", str(out)])
    return status


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1] if len(sys.argv) > 1 else "results")))
