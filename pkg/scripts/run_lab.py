"""Command line entry-point for running rlct-lab from a source checkout."""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rlct_lab.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
