"""Solution dumps for the shock problems plus fine-grid references.

Writes Burgers (N=80, T=12) and Shu-Osher (N=200, 400) dumps for every
scheme, appends wall-clock times to timing.csv, and computes references at
N=1600 (Burgers) and N=4000 (Shu-Osher, OWENO only). The references take a
few minutes; pass --no-reference to skip them.

Usage: python3 scripts/shock_runs.py [OUTPUT_DIR] [--no-reference]
"""

from __future__ import annotations

import sys
from pathlib import Path

from oweno.cli import main


def run(out: Path, reference: bool = True) -> int:
    status = main(["solve", "--problem", "burgers-shock", "--N", "80", "-o", str(out)])
    status |= main(["solve", "--problem", "shu-osher", "--N", "200,400", "-o", str(out)])
    if reference:
        ref = str(out / "reference")
        status |= main(["solve", "--problem", "burgers-shock", "--N", "1600", "-o", ref])
        status |= main(["solve", "--problem", "shu-osher", "--N", "4000", "--variants", "oweno", "-o", ref])
    return status


if __name__ == "__main__":
    args = [a for a in sys.argv[1:] if not a.startswith("--")]
    sys.exit(run(Path(args[0] if args else "results"), "--no-reference" not in sys.argv))
